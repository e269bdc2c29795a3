#pragma once

#include <algorithm>

#include <Eigen/Dense>

#include "ddmr/errors.hpp"

namespace ddmr {

using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Vec10 = Eigen::Matrix<double, 10, 1>;

/// Coulomb deadband: wheel speeds with |w| below this count as stationary,
/// so no Coulomb torque is applied (avoids sign chatter inside RK4 stages).
inline constexpr double kCoulombDeadband = 1e-4;  // rad/s

/// sign(w) with a dead zone around zero.
inline double sgn_deadband(double w, double eps = kCoulombDeadband) {
  if (w > eps) return 1.0;
  if (w < -eps) return -1.0;
  return 0.0;
}

/// Plant constants of the differential-drive robot.
///
/// c1..c9 are the coupling constants of the state-space model; they are
/// direct configuration inputs (not derived from masses here). c1, c2, c3,
/// c5, c6, c8, c9 must be positive, c4 negative, c7 may have either sign.
struct PlantParams {
  double R = 0.1;        // wheel radius (m)
  double W = 0.4;        // track width (m)
  double c1 = 0.05;
  double c2 = 0.5;
  double c3 = 0.02;
  double c4 = -0.01;
  double c5 = 2.0;
  double c6 = 9.0;
  double c7 = 1.0;
  double c8 = 0.1;
  double c9 = 0.02;
  double cV = 0.05;      // viscous friction coefficient (N*m*s/rad)
  double cD = 0.02;      // Coulomb friction magnitude (N*m)
  double tau_max = 15.0; // per-wheel torque limit (N*m)

  /// Throws ValidationError if any sign or finiteness constraint fails.
  void validate() const;
};

/// Full plant state: posture, chassis rates, wheel angles and rates.
///
/// Vector layout (as_vector / from_vector):
/// [x, xdot, y, ydot, theta, omega, phiR, omegaR, phiL, omegaL].
struct RobotState {
  double x = 0.0;       // m
  double y = 0.0;       // m
  double theta = 0.0;   // rad, unwrapped
  double xdot = 0.0;    // m/s
  double ydot = 0.0;    // m/s
  double omega = 0.0;   // rad/s
  double phiR = 0.0;    // rad
  double phiL = 0.0;    // rad
  double omegaR = 0.0;  // rad/s
  double omegaL = 0.0;  // rad/s

  Eigen::Vector3d posture() const { return {x, y, theta}; }
  Eigen::Vector3d posture_rate() const { return {xdot, ydot, omega}; }

  Vec10 as_vector() const;
  static RobotState from_vector(const Vec10& v);

  bool all_finite() const;
};

struct WheelTorques {
  double tauR = 0.0;  // N*m
  double tauL = 0.0;  // N*m

  Eigen::Vector2d as_vector() const { return {tauR, tauL}; }
};

/// Reparametrized dynamic constants: sigma1 = 1/(2 c2),
/// sigma2 = -c4/(2 c1 c5), sigma3 = 1/(2 c5), sigma4 = c3/2.
struct SigmaParams {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;

  Eigen::Vector4d as_vector() const { return {s1, s2, s3, s4}; }
};

struct KinematicMaps {
  Mat23 A;        // pdot -> wheel rates
  Mat32 A_tilde;  // wheel rates -> pdot
};

/// The wheel/chassis velocity maps. A(theta)*A_tilde(theta) == I2.
KinematicMaps kinematic_maps(double theta, double R, double W);

/// Builds a state whose chassis velocity and wheel rates satisfy the
/// nonholonomic constraint exactly: xdot = v cos(theta), ydot = v sin(theta),
/// omegaR/L = (v +- W*omega/2) / R.
RobotState consistent_state(const Eigen::Vector3d& posture, double v,
                            double omega,
                            const Eigen::Vector2d& wheel_angles,
                            const PlantParams& params);

/// Per-wheel dissipative torque: cV*w + cD*sgn_deadband(w).
WheelTorques friction_torque(double omegaR, double omegaL,
                             const PlantParams& params);

/// Right-hand side of the state-space model with friction folded into the
/// effective torque (u_eff = u - friction). Layout matches
/// RobotState::as_vector.
Vec10 state_derivative(const RobotState& s, const WheelTorques& u,
                       const PlantParams& params);

/// One classical RK4 step with zero-order-hold torque. Coulomb sign is
/// re-evaluated per stage. Throws DivergenceError on non-finite results.
RobotState step(const RobotState& s, const WheelTorques& u, double dt,
                const PlantParams& params);

/// Throws ValidationError on zero denominators; result is strictly positive
/// whenever the params satisfy their sign constraints.
SigmaParams sigma_from_c(const PlantParams& params);

/// Residual of the nonholonomic constraint: pdot - A_tilde(theta)*Phidot.
Eigen::Vector3d nonholonomic_residual(const RobotState& s,
                                      const PlantParams& params);

inline WheelTorques clip_torques(const WheelTorques& u, double tau_max) {
  return {std::clamp(u.tauR, -tau_max, tau_max),
          std::clamp(u.tauL, -tau_max, tau_max)};
}

}  // namespace ddmr
