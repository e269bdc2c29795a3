#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ddmr/trajectories.hpp"

using namespace ddmr;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<TrajectorySpec> all_specs() {
  const TrajectorySuite suite = default_suite();
  return {suite.train, suite.tests[0], suite.tests[1], suite.tests[2]};
}

// Arc-length breakpoints of the square pieces within one lap.
std::vector<double> square_breakpoints(const SquareSpec& q) {
  const double half = q.side / 2.0 - q.corner_radius;
  const double straight = q.side - 2.0 * q.corner_radius;
  const double arc = kPi / 2.0 * q.corner_radius;
  std::vector<double> lens = {half, arc, straight, arc, straight,
                              arc,  straight, arc, half};
  std::vector<double> out;
  double acc = 0.0;
  for (double l : lens) {
    acc += l;
    out.push_back(acc);
  }
  return out;
}

bool near_square_junction(const SquareSpec& q, double t, double window_s) {
  const double perim = square_perimeter(q);
  double s = std::fmod(q.speed * t, perim);
  for (double b : square_breakpoints(q)) {
    if (std::abs(s - b) < window_s || std::abs(s - b + perim) < window_s ||
        std::abs(s) < window_s) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("sinusoid: closed form at t = 0") {
  const SinusoidSpec spec{1.0, 1.0, 4.0};
  const TrajectorySample s = sample(spec, 0.0);
  CHECK(s.p[0] == 0.0);
  CHECK(s.p[1] == 0.0);
  CHECK(s.p[2] == doctest::Approx(std::atan2(kPi / 2.0, 1.0)).epsilon(1e-12));
  CHECK(s.v == doctest::Approx(std::sqrt(1.0 + kPi * kPi / 4.0)).epsilon(1e-12));
}

TEST_CASE("circle: constant-rate case") {
  const CircleSpec spec{2.0, 0.5, 0.0, 0.5};
  const TrajectorySample s = sample(spec, kPi);
  CHECK(s.p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.p[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circle: speed is radius times the polar rate, exactly") {
  const CircleSpec spec{2.0, 0.5, 0.25, 0.5};
  for (int i = 0; i < 200; ++i) {
    const double t = 0.05 * i;
    const TrajectorySample s = sample(spec, t);
    const double expected =
        spec.radius * (spec.base_rate + spec.rate_mod_amp *
                                            std::sin(spec.rate_mod_freq * t));
    CHECK(s.v == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("square: perimeter bookkeeping and lap closure") {
  const SquareSpec spec{3.0, 0.3, 1.0};
  const double perim = square_perimeter(spec);
  CHECK(perim == doctest::Approx(4.0 * 3.0 - 8.0 * 0.3 + 2.0 * kPi * 0.3));

  const TrajectorySample start = sample(spec, 0.0);
  const TrajectorySample lap = sample(spec, perim / spec.speed);
  CHECK(std::abs(lap.p[0] - start.p[0]) < 1e-9);
  CHECK(std::abs(lap.p[1] - start.p[1]) < 1e-9);
  // Heading accumulates one full turn per lap.
  CHECK(lap.p[2] == doctest::Approx(start.p[2] + 2.0 * kPi).epsilon(1e-9));
}

TEST_CASE("default suite: shipped values") {
  const TrajectorySuite suite = default_suite();
  const auto& train = std::get<SinusoidSpec>(suite.train);
  const auto& fast = std::get<SinusoidSpec>(suite.tests[0]);
  CHECK(fast.forward_speed > train.forward_speed);
  const auto& circle = std::get<CircleSpec>(suite.tests[1]);
  CHECK(circle.rate_mod_amp != 0.0);
  CHECK_NOTHROW(validate(suite.train));
  for (const TrajectorySpec& t : suite.tests) CHECK_NOTHROW(validate(t));
}

TEST_CASE("derivative consistency: central differences match closed forms") {
  const double h = 1e-5;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> time(2.0 * h, 30.0);
  for (const TrajectorySpec& spec : all_specs()) {
    const SquareSpec* sq = std::get_if<SquareSpec>(&spec);
    int checked = 0;
    while (checked < 1000) {
      const double t = time(rng);
      if (sq && near_square_junction(*sq, t, 2.0 * h * sq->speed)) continue;
      ++checked;
      const TrajectorySample sm = sample(spec, t - h);
      const TrajectorySample sp = sample(spec, t + h);
      const TrajectorySample s0 = sample(spec, t);
      const Eigen::Vector3d fd_vel = (sp.p - sm.p) / (2.0 * h);
      const Eigen::Vector3d fd_acc = (sp.pdot - sm.pdot) / (2.0 * h);
      CHECK((fd_vel - s0.pdot).cwiseAbs().maxCoeff() < 1e-4);
      CHECK((fd_acc - s0.pddot).cwiseAbs().maxCoeff() < 1e-4);
    }
  }
}

TEST_CASE("heading continuity: no wrap jumps") {
  const double h = 1e-3;
  for (const TrajectorySpec& spec : all_specs()) {
    double prev = sample(spec, 0.0).p[2];
    for (int i = 1; i < 20000; ++i) {
      const double th = sample(spec, i * h).p[2];
      CHECK(std::abs(th - prev) < kPi);
      prev = th;
    }
  }
}

TEST_CASE("tangent-heading identities hold at random times") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> time(0.0, 25.0);
  for (const TrajectorySpec& spec : all_specs()) {
    for (int i = 0; i < 300; ++i) {
      const TrajectorySample s = sample(spec, time(rng));
      CHECK(s.v == doctest::Approx(s.pdot.head<2>().norm()).epsilon(1e-12));
      CHECK(s.omega == doctest::Approx(s.pdot[2]).epsilon(1e-12));
      // theta_d equals atan2(ydot, xdot) up to full turns.
      const double wrapped =
          std::remainder(s.p[2] - std::atan2(s.pdot[1], s.pdot[0]), 2.0 * kPi);
      CHECK(std::abs(wrapped) < 1e-9);
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(validate(TrajectorySpec(SinusoidSpec{0.0, 1.0, 4.0})),
                  ValidationError);
  CHECK_THROWS_AS(validate(TrajectorySpec(SinusoidSpec{1.0, -1.0, 4.0})),
                  ValidationError);
  CHECK_THROWS_AS(validate(TrajectorySpec(CircleSpec{2.0, 0.5, 0.6, 0.5})),
                  ValidationError);
  CHECK_THROWS_AS(validate(TrajectorySpec(SquareSpec{3.0, 1.6, 1.0})),
                  ValidationError);
  CHECK_THROWS_AS(sample(TrajectorySpec(SinusoidSpec{1.0, 1.0, 4.0}), -1.0),
                  ValidationError);
}
