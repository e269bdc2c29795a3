#pragma once

#include <utility>

#include <Eigen/Dense>

#include "ddmr/agent_state.hpp"
#include "ddmr/dynamics.hpp"

namespace ddmr {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat28 = Eigen::Matrix<double, 2, 8>;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// PID gain triples for the two translation channels (kp, ki, kd) and the
/// heading channel (*_heading). Built by gains_from_poles so that each
/// channel's cubic lambda^3 + kd lambda^2 + kp lambda + ki has a triple
/// real root.
struct GainSet {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double kp_heading = 0.0;
  double ki_heading = 0.0;
  double kd_heading = 0.0;

  Eigen::Vector3d Kp() const { return {kp, kp, kp_heading}; }
  Eigen::Vector3d Ki() const { return {ki, ki, ki_heading}; }
  Eigen::Vector3d Kd() const { return {kd, kd, kd_heading}; }
};

/// Interval box (center +- radius) for the six constrained physical
/// parameters: sigma1..4, cV, cD. Every reachable value must stay strictly
/// positive, so center - radius > 0 is required for each entry.
struct ConstraintBox {
  Eigen::Vector4d sigma_center;
  Eigen::Vector4d sigma_radius;
  double cV_center = 0.0;
  double cV_radius = 0.0;
  double cD_center = 0.0;
  double cD_radius = 0.0;

  void validate() const;
};

/// Trainable policy parameters, ordered [z1..z4, zV, zD, alpha, beta].
struct PolicyParams {
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  double zV = 0.0;
  double zD = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  Vec8 pack() const {
    Vec8 v;
    v << z, zV, zD, alpha, beta;
    return v;
  }
  static PolicyParams unpack(const Vec8& v) {
    PolicyParams p;
    p.z = v.segment<4>(0);
    p.zV = v[4];
    p.zD = v[5];
    p.alpha = v[6];
    p.beta = v[7];
    return p;
  }
};

/// World-frame tracking error and its integral/derivative. e[2] is kept in
/// (-pi, pi]; e_int is clamped elementwise.
struct TrackingErrorState {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_int = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_dot = Eigen::Vector3d::Zero();
};

inline constexpr double kIntegralClamp = 10.0;

/// World-frame error from (desired - actual) posture with wrapped heading.
Eigen::Vector3d posture_error(const Eigen::Vector3d& p_desired,
                              const Eigen::Vector3d& p_actual);

/// Rectangle-rule integral update with per-channel anti-windup clamp.
TrackingErrorState integrate_error(TrackingErrorState state,
                                   const Eigen::Vector3d& e,
                                   const Eigen::Vector3d& e_dot, double dt,
                                   double clamp = kIntegralClamp);

/// Rotation of (p_d - p) into the body frame; third component wrapped.
Eigen::Vector3d body_frame_error(const Eigen::Vector3d& p,
                                 const Eigen::Vector3d& p_d);

struct VelocityCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

/// v = v_d cos(e3) + k1 e1, omega = omega_d + k2 v_d sinc(e3) e2 + k3 e3.
VelocityCommand kinematic_law(const Eigen::Vector3d& e_body, double v_d,
                              double omega_d, double k1, double k2, double k3);

/// Wheel-rate set points realizing a chassis velocity command.
std::pair<double, double> wheel_setpoints(double v, double omega, double R,
                                          double W);

struct PidGains {
  double kp = 2.0;
  double ki = 5.0;
  double kd = 0.01;
  double integral_limit = 10.0;
  double output_limit = 5.0;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;
};

/// Positional PID on the wheel-rate error with integral clamping and output
/// clipping. Pure: the advanced state is returned alongside the torque.
std::pair<double, PidState> pid_wheel_step(double setpoint, double measured,
                                           PidState state, double dt,
                                           const PidGains& gains);

/// Triple-pole synthesis: a = alpha^2 + eps, b = beta^2 + eps;
/// kp = 3a^2, ki = a^3, kd = 3a (and the b analogues for heading).
GainSet gains_from_poles(double alpha, double beta, double eps);

/// The six physical quantities produced by the constraint mapping.
struct PhysicalParams {
  SigmaParams sigma;
  double cV = 0.0;
  double cD = 0.0;
};

/// tanh change of variables: value = center + radius * tanh(z). Outputs lie
/// strictly inside the open box for any finite z.
PhysicalParams constrain_params(const PolicyParams& pi,
                                const ConstraintBox& box);

/// M(theta) of the compact torque model u = M(theta) pddot + C(omega).
Mat23 m_matrix(double theta, const SigmaParams& sigma);

/// C(omega) = -sigma4 * omega^2 * [1, 1]^T.
Eigen::Vector2d c_vector(double omega, double sigma4);

/// Computed-torque law (unclipped): model inversion of the desired
/// acceleration plus PID error correction plus friction compensation.
WheelTorques ctc_torque(const TrackingErrorState& err,
                        const Eigen::Vector3d& pddot_d, double theta,
                        const Eigen::Vector3d& pdot,
                        const PhysicalParams& phys, const GainSet& gains,
                        double R, double W);

/// The gray-box policy: constrain_params -> gains_from_poles -> ctc_torque,
/// a pure function of the observation and the policy parameters.
WheelTorques gctc_action(const AgentState& s, const PolicyParams& pi,
                         const ConstraintBox& box, double eps, double R,
                         double W);

/// Exact 2x8 Jacobian of gctc_action with respect to the policy parameters,
/// columns ordered as PolicyParams::pack.
Mat28 gctc_jacobian(const AgentState& s, const PolicyParams& pi,
                    const ConstraintBox& box, double eps, double R, double W);

}  // namespace ddmr
