#include "ddmr/dynamics.hpp"

#include <cmath>

namespace ddmr {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void PlantParams::validate() const {
  const double entries[] = {R, W, c1, c2, c3, c4, c5, c6, c7, c8, c9,
                            cV, cD, tau_max};
  for (double v : entries) {
    if (!finite(v)) throw ValidationError("PlantParams: non-finite entry");
  }
  if (R <= 0.0 || W <= 0.0) throw ValidationError("PlantParams: R, W must be > 0");
  if (tau_max <= 0.0) throw ValidationError("PlantParams: tau_max must be > 0");
  if (cV < 0.0 || cD < 0.0) throw ValidationError("PlantParams: cV, cD must be >= 0");
  if (c1 <= 0.0 || c2 <= 0.0 || c3 <= 0.0 || c5 <= 0.0 || c6 <= 0.0 ||
      c8 <= 0.0 || c9 <= 0.0) {
    throw ValidationError("PlantParams: c1,c2,c3,c5,c6,c8,c9 must be > 0");
  }
  if (c4 >= 0.0) throw ValidationError("PlantParams: c4 must be < 0");
}

Vec10 RobotState::as_vector() const {
  Vec10 v;
  v << x, xdot, y, ydot, theta, omega, phiR, omegaR, phiL, omegaL;
  return v;
}

RobotState RobotState::from_vector(const Vec10& v) {
  RobotState s;
  s.x = v[0];
  s.xdot = v[1];
  s.y = v[2];
  s.ydot = v[3];
  s.theta = v[4];
  s.omega = v[5];
  s.phiR = v[6];
  s.omegaR = v[7];
  s.phiL = v[8];
  s.omegaL = v[9];
  return s;
}

bool RobotState::all_finite() const { return as_vector().allFinite(); }

KinematicMaps kinematic_maps(double theta, double R, double W) {
  if (!finite(theta)) throw ValidationError("kinematic_maps: non-finite theta");
  if (R <= 0.0 || W <= 0.0) throw ValidationError("kinematic_maps: R, W must be > 0");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  KinematicMaps m;
  m.A << c / R, s / R, W / (2.0 * R),
         c / R, s / R, -W / (2.0 * R);
  m.A_tilde << R / 2.0 * c, R / 2.0 * c,
               R / 2.0 * s, R / 2.0 * s,
               R / W, -R / W;
  return m;
}

RobotState consistent_state(const Eigen::Vector3d& posture, double v,
                            double omega,
                            const Eigen::Vector2d& wheel_angles,
                            const PlantParams& params) {
  params.validate();
  RobotState s;
  s.x = posture[0];
  s.y = posture[1];
  s.theta = posture[2];
  s.xdot = v * std::cos(s.theta);
  s.ydot = v * std::sin(s.theta);
  s.omega = omega;
  s.phiR = wheel_angles[0];
  s.phiL = wheel_angles[1];
  s.omegaR = (v + params.W * omega / 2.0) / params.R;
  s.omegaL = (v - params.W * omega / 2.0) / params.R;
  if (!s.all_finite()) throw ValidationError("consistent_state: non-finite input");
  return s;
}

WheelTorques friction_torque(double omegaR, double omegaL,
                             const PlantParams& params) {
  return {params.cV * omegaR + params.cD * sgn_deadband(omegaR),
          params.cV * omegaL + params.cD * sgn_deadband(omegaL)};
}

namespace {

// RK4 stages reuse this without re-validating; non-finite intermediates are
// caught once at the end of step().
Vec10 derivative_unchecked(const RobotState& s, const WheelTorques& u,
                           const PlantParams& p) {
  const WheelTorques fric = friction_torque(s.omegaR, s.omegaL, p);
  const double u1 = u.tauR - fric.tauR;
  const double u2 = u.tauL - fric.tauL;
  const double ct = std::cos(s.theta);
  const double st = std::sin(s.theta);
  const double wsum = s.omegaR + s.omegaL;
  const double om2 = s.omega * s.omega;

  Vec10 d;
  d[0] = s.xdot;
  d[1] = -p.c1 * s.omega * wsum * st + p.c2 * (u1 + u2 + p.c3 * om2) * ct;
  d[2] = s.ydot;
  d[3] = +p.c1 * s.omega * wsum * ct + p.c2 * (u1 + u2 + p.c3 * om2) * st;
  d[4] = s.omega;
  d[5] = p.c4 * s.omega * wsum + p.c5 * (u1 - u2);
  d[6] = s.omegaR;
  d[7] = p.c6 * u1 + p.c7 * u2 + p.c8 * om2 - p.c9 * s.omega * wsum;
  d[8] = s.omegaL;
  d[9] = p.c7 * u1 + p.c6 * u2 + p.c8 * om2 + p.c9 * s.omega * wsum;
  return d;
}

}  // namespace

Vec10 state_derivative(const RobotState& s, const WheelTorques& u,
                       const PlantParams& p) {
  if (!s.all_finite() || !finite(u.tauR) || !finite(u.tauL)) {
    throw ValidationError("state_derivative: non-finite input");
  }
  return derivative_unchecked(s, u, p);
}

RobotState step(const RobotState& s, const WheelTorques& u, double dt,
                const PlantParams& params) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw ValidationError("step: dt must lie in (0, 0.01]");
  }
  const Vec10 x0 = s.as_vector();
  const Vec10 k1 = state_derivative(s, u, params);
  const Vec10 k2 = derivative_unchecked(
      RobotState::from_vector(x0 + 0.5 * dt * k1), u, params);
  const Vec10 k3 = derivative_unchecked(
      RobotState::from_vector(x0 + 0.5 * dt * k2), u, params);
  const Vec10 k4 =
      derivative_unchecked(RobotState::from_vector(x0 + dt * k3), u, params);
  const Vec10 x1 = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) {
    throw DivergenceError("step: integration produced a non-finite state");
  }
  return RobotState::from_vector(x1);
}

SigmaParams sigma_from_c(const PlantParams& p) {
  p.validate();
  if (p.c2 == 0.0 || p.c5 == 0.0 || p.c1 == 0.0) {
    throw ValidationError("sigma_from_c: zero denominator");
  }
  SigmaParams sg;
  sg.s1 = 1.0 / (2.0 * p.c2);
  sg.s2 = -p.c4 / (2.0 * p.c1 * p.c5);
  sg.s3 = 1.0 / (2.0 * p.c5);
  sg.s4 = p.c3 / 2.0;
  return sg;
}

Eigen::Vector3d nonholonomic_residual(const RobotState& s,
                                      const PlantParams& params) {
  const KinematicMaps m = kinematic_maps(s.theta, params.R, params.W);
  return s.posture_rate() - m.A_tilde * Eigen::Vector2d(s.omegaR, s.omegaL);
}

}  // namespace ddmr
