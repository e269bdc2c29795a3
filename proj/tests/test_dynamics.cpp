#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ddmr/dynamics.hpp"

using namespace ddmr;

namespace {

PlantParams frictionless() {
  PlantParams p;
  p.cV = 0.0;
  p.cD = 0.0;
  return p;
}

}  // namespace

TEST_CASE("kinematic maps: A * A_tilde = I2 for random headings") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> theta(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const KinematicMaps m = kinematic_maps(theta(rng), 0.1, 0.4);
    const Eigen::Matrix2d prod = m.A * m.A_tilde;
    CHECK((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kinematic maps: direct substitution at theta = 0") {
  const KinematicMaps m = kinematic_maps(0.0, 0.1, 0.4);
  Mat23 expected;
  expected << 10.0, 0.0, 2.0, 10.0, 0.0, -2.0;
  CHECK((m.A - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kinematic maps: A_tilde reproduces the scalar velocity relations") {
  // Oracle: v = R/2 (wR + wL), omega = R/W (wR - wL).
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> theta(-10.0, 10.0);
  std::uniform_real_distribution<double> rate(-30.0, 30.0);
  const double R = 0.1, W = 0.4;
  for (int i = 0; i < 1000; ++i) {
    const double th = theta(rng);
    const Eigen::Vector2d wheel(rate(rng), rate(rng));
    const Eigen::Vector3d pdot = kinematic_maps(th, R, W).A_tilde * wheel;
    const double v = R / 2.0 * (wheel[0] + wheel[1]);
    const double om = R / W * (wheel[0] - wheel[1]);
    CHECK(pdot[0] == doctest::Approx(v * std::cos(th)).epsilon(1e-12));
    CHECK(pdot[1] == doctest::Approx(v * std::sin(th)).epsilon(1e-12));
    CHECK(pdot[2] == doctest::Approx(om).epsilon(1e-12));
  }
}

TEST_CASE("kinematic maps: rejects non-finite heading") {
  CHECK_THROWS_AS(kinematic_maps(std::nan(""), 0.1, 0.4), ValidationError);
}

TEST_CASE("consistent_state: rest, pure forward, pure turn") {
  const PlantParams p;
  const RobotState rest =
      consistent_state({0, 0, 0}, 0.0, 0.0, {0.0, 0.0}, p);
  CHECK(rest.omegaR == 0.0);
  CHECK(rest.omegaL == 0.0);
  CHECK(rest.xdot == 0.0);

  const RobotState fwd = consistent_state({0, 0, 0}, 1.0, 0.0, {0.0, 0.0}, p);
  CHECK(fwd.omegaR == doctest::Approx(10.0));
  CHECK(fwd.omegaL == doctest::Approx(10.0));

  const RobotState turn = consistent_state({0, 0, 0}, 0.0, 1.0, {0.0, 0.0}, p);
  CHECK(turn.omegaR == doctest::Approx(2.0));
  CHECK(turn.omegaL == doctest::Approx(-2.0));
}

TEST_CASE("consistent_state: nonholonomic residual vanishes") {
  const PlantParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const RobotState s = consistent_state({u(rng), u(rng), 4.0 * u(rng)},
                                          u(rng), u(rng), {u(rng), u(rng)}, p);
    CHECK(nonholonomic_residual(s, p).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("friction torque: deadband, substitution, antisymmetry") {
  PlantParams p;
  p.cV = 0.1;
  p.cD = 0.05;
  const WheelTorques rest = friction_torque(0.0, 0.0, p);
  CHECK(rest.tauR == 0.0);
  CHECK(rest.tauL == 0.0);

  CHECK(friction_torque(2.0, 0.0, p).tauR == doctest::Approx(0.25));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(kCoulombDeadband, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double wR = rate(rng), wL = rate(rng);
    const WheelTorques pos = friction_torque(wR, wL, p);
    const WheelTorques neg = friction_torque(-wR, -wL, p);
    CHECK(pos.tauR == doctest::Approx(-neg.tauR).epsilon(1e-12));
    CHECK(pos.tauL == doctest::Approx(-neg.tauL).epsilon(1e-12));
  }
}

TEST_CASE("state derivative: zero torque at rest is an equilibrium") {
  const PlantParams p;
  const RobotState s = consistent_state({1.0, -2.0, 0.7}, 0.0, 0.0, {0, 0}, p);
  const Vec10 d = state_derivative(s, {0.0, 0.0}, p);
  CHECK(d.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state derivative: equal torques at rest accelerate straight") {
  PlantParams p = frictionless();
  const RobotState s = consistent_state({0, 0, 0}, 0.0, 0.0, {0, 0}, p);
  const double tau = 1.3;
  const Vec10 d = state_derivative(s, {tau, tau}, p);
  CHECK(d[1] == doctest::Approx(2.0 * p.c2 * tau).epsilon(1e-12));  // xddot
  CHECK(d[3] == 0.0);                                               // yddot
  CHECK(d[5] == 0.0);                                               // omegadot
}

TEST_CASE("state derivative: acceleration inversion identities") {
  // Oracle: substitute computed accelerations back into the closed-form
  // inversion for tau_R + tau_L and tau_R - tau_L.
  PlantParams p = frictionless();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> torque(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    RobotState s;
    s.x = u(rng);
    s.y = u(rng);
    s.theta = 6.0 * u(rng);
    s.xdot = 2.0 * u(rng);
    s.ydot = 2.0 * u(rng);
    s.omega = 3.0 * u(rng);
    s.phiR = u(rng);
    s.phiL = u(rng);
    s.omegaR = 20.0 * u(rng);
    s.omegaL = 20.0 * u(rng);
    const WheelTorques tau{torque(rng), torque(rng)};
    const Vec10 d = state_derivative(s, tau, p);
    const double xdd = d[1], ydd = d[3], omdd = d[5];
    const double ct = std::cos(s.theta), st = std::sin(s.theta);
    const double sum_rec =
        -p.c3 * s.omega * s.omega + (xdd * ct + ydd * st) / p.c2;
    const double diff_rec =
        (omdd - p.c4 / p.c1 * (ydd * ct - xdd * st)) / p.c5;
    CHECK(std::abs(sum_rec - (tau.tauR + tau.tauL)) < 1e-10);
    CHECK(std::abs(diff_rec - (tau.tauR - tau.tauL)) < 1e-10);
  }
}

TEST_CASE("step: zero torque from rest leaves the state unchanged") {
  const PlantParams p;
  const RobotState s0 = consistent_state({0.4, -0.2, 1.1}, 0.0, 0.0, {0, 0}, p);
  const RobotState s1 = step(s0, {0.0, 0.0}, 1e-3, p);
  CHECK((s1.as_vector() - s0.as_vector()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step: straight-line run stays on the x axis") {
  const PlantParams p;
  RobotState s = consistent_state({0, 0, 0}, 0.5, 0.0, {0, 0}, p);
  for (int i = 0; i < 1000; ++i) {
    s = step(s, {0.8, 0.8}, 1e-3, p);
  }
  CHECK(std::abs(s.y) < 1e-12);
  CHECK(std::abs(s.theta) < 1e-12);
  CHECK(s.x > 0.4);
}

TEST_CASE("step: self-convergence under refinement") {
  // Oracle: a 10x finer integration of the identical piecewise-held torque
  // signal (the integrator holds torque over each step by contract).
  const PlantParams p;  // wheel rates stay positive, so friction is smooth
  auto run = [&](int substeps) {
    const double hold = 1e-3;
    const double dt = hold / substeps;
    RobotState s = consistent_state({0, 0, 0.2}, 0.6, 0.1, {0, 0}, p);
    for (int i = 0; i < 1000; ++i) {
      const double t = i * hold;
      const WheelTorques tau{1.0 + 0.5 * std::sin(2.0 * t),
                             1.0 + 0.4 * std::cos(3.0 * t)};
      for (int k = 0; k < substeps; ++k) s = step(s, tau, dt, p);
    }
    return s;
  };
  const Vec10 coarse = run(1).as_vector();
  const Vec10 fine = run(10).as_vector();
  CHECK((coarse - fine).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("step: rejects bad dt and detects blow-up") {
  const PlantParams p;
  const RobotState s = consistent_state({0, 0, 0}, 0.0, 0.0, {0, 0}, p);
  CHECK_THROWS_AS(step(s, {0, 0}, 0.0, p), ValidationError);
  CHECK_THROWS_AS(step(s, {0, 0}, 0.02, p), ValidationError);

  RobotState huge = s;
  huge.omegaR = 1e300;
  huge.omega = 1e300;
  CHECK_THROWS_AS(step(huge, {0, 0}, 1e-3, p), DivergenceError);
}

TEST_CASE("sigma_from_c: direct substitutions") {
  PlantParams p;
  p.c2 = 0.5;
  CHECK(sigma_from_c(p).s1 == doctest::Approx(1.0));
  p.c3 = 0.4;
  CHECK(sigma_from_c(p).s4 == doctest::Approx(0.2));
  p.c1 = 2.0;
  p.c4 = -1.0;
  p.c5 = 0.25;
  CHECK(sigma_from_c(p).s2 == doctest::Approx(1.0));
}

TEST_CASE("sigma_from_c: strictly positive for valid params") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    PlantParams p;
    p.c1 = u(rng);
    p.c2 = u(rng);
    p.c3 = u(rng);
    p.c4 = -u(rng);
    p.c5 = u(rng);
    p.c6 = u(rng);
    p.c7 = u(rng) - 5.0;  // either sign
    p.c8 = u(rng);
    p.c9 = u(rng);
    const SigmaParams sg = sigma_from_c(p);
    CHECK(sg.s1 > 0.0);
    CHECK(sg.s2 > 0.0);
    CHECK(sg.s3 > 0.0);
    CHECK(sg.s4 > 0.0);
  }
}

TEST_CASE("plant params: sign constraints enforced") {
  PlantParams p;
  p.c4 = 0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = PlantParams{};
  p.c2 = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = PlantParams{};
  p.R = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = PlantParams{};
  p.c7 = -3.0;  // c7 may be negative
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("nonholonomic residual is conserved under integration") {
  PlantParams p;
  p.cD = 0.0;  // keep the torque profile smooth
  RobotState s = consistent_state({0, 0, 0.3}, 0.8, 0.2, {0, 0}, p);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = i * 1e-3;
    const WheelTorques tau{1.5 * std::sin(1.3 * t), 1.2 * std::cos(0.9 * t)};
    s = step(s, tau, 1e-3, p);
    worst = std::max(worst, nonholonomic_residual(s, p).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}
