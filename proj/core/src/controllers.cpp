#include "ddmr/controllers.hpp"

#include <cmath>

namespace ddmr {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double sech2(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

}  // namespace

double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

void ConstraintBox::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(sigma_radius[i] > 0.0) ||
        !(sigma_center[i] - sigma_radius[i] > 0.0)) {
      throw ValidationError("ConstraintBox: sigma range must stay positive");
    }
  }
  if (!(cV_radius > 0.0) || !(cV_center - cV_radius > 0.0) ||
      !(cD_radius > 0.0) || !(cD_center - cD_radius > 0.0)) {
    throw ValidationError("ConstraintBox: friction range must stay positive");
  }
}

Eigen::Vector3d posture_error(const Eigen::Vector3d& p_desired,
                              const Eigen::Vector3d& p_actual) {
  Eigen::Vector3d e = p_desired - p_actual;
  e[2] = wrap_angle(e[2]);
  return e;
}

TrackingErrorState integrate_error(TrackingErrorState state,
                                   const Eigen::Vector3d& e,
                                   const Eigen::Vector3d& e_dot, double dt,
                                   double clamp) {
  state.e = e;
  state.e_dot = e_dot;
  state.e_int += e * dt;
  state.e_int = state.e_int.cwiseMax(-clamp).cwiseMin(clamp);
  return state;
}

Eigen::Vector3d body_frame_error(const Eigen::Vector3d& p,
                                 const Eigen::Vector3d& p_d) {
  const double c = std::cos(p[2]);
  const double s = std::sin(p[2]);
  const double dx = p_d[0] - p[0];
  const double dy = p_d[1] - p[1];
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(p_d[2] - p[2])};
}

VelocityCommand kinematic_law(const Eigen::Vector3d& e_body, double v_d,
                              double omega_d, double k1, double k2,
                              double k3) {
  VelocityCommand cmd;
  cmd.v = v_d * std::cos(e_body[2]) + k1 * e_body[0];
  cmd.omega = omega_d + k2 * v_d * sinc(e_body[2]) * e_body[1] + k3 * e_body[2];
  return cmd;
}

std::pair<double, double> wheel_setpoints(double v, double omega, double R,
                                          double W) {
  return {(v + W * omega / 2.0) / R, (v - W * omega / 2.0) / R};
}

std::pair<double, PidState> pid_wheel_step(double setpoint, double measured,
                                           PidState state, double dt,
                                           const PidGains& gains) {
  const double err = setpoint - measured;
  state.integral = std::clamp(state.integral + err * dt,
                              -gains.integral_limit, gains.integral_limit);
  const double deriv = state.has_prev ? (err - state.prev_error) / dt : 0.0;
  state.prev_error = err;
  state.has_prev = true;
  const double out =
      gains.kp * err + gains.ki * state.integral + gains.kd * deriv;
  return {std::clamp(out, -gains.output_limit, gains.output_limit), state};
}

GainSet gains_from_poles(double alpha, double beta, double eps) {
  if (!(eps > 0.0)) throw ValidationError("gains_from_poles: eps must be > 0");
  const double a = alpha * alpha + eps;
  const double b = beta * beta + eps;
  GainSet g;
  g.kp = 3.0 * a * a;
  g.ki = a * a * a;
  g.kd = 3.0 * a;
  g.kp_heading = 3.0 * b * b;
  g.ki_heading = b * b * b;
  g.kd_heading = 3.0 * b;
  return g;
}

namespace {

// tanh(z) rounds to exactly +-1.0 for |z| > ~19, which would place the
// output on the box boundary; keep it representably inside the open
// interval.
double tanh_interior(double z) {
  return std::clamp(std::tanh(z), -1.0 + 1e-12, 1.0 - 1e-12);
}

}  // namespace

PhysicalParams constrain_params(const PolicyParams& pi,
                                const ConstraintBox& box) {
  PhysicalParams out;
  out.sigma.s1 = box.sigma_center[0] + box.sigma_radius[0] * tanh_interior(pi.z[0]);
  out.sigma.s2 = box.sigma_center[1] + box.sigma_radius[1] * tanh_interior(pi.z[1]);
  out.sigma.s3 = box.sigma_center[2] + box.sigma_radius[2] * tanh_interior(pi.z[2]);
  out.sigma.s4 = box.sigma_center[3] + box.sigma_radius[3] * tanh_interior(pi.z[3]);
  out.cV = box.cV_center + box.cV_radius * tanh_interior(pi.zV);
  out.cD = box.cD_center + box.cD_radius * tanh_interior(pi.zD);
  return out;
}

Mat23 m_matrix(double theta, const SigmaParams& sg) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat23 m;
  m << sg.s1 * c - sg.s2 * s, sg.s1 * s + sg.s2 * c, +sg.s3,
       sg.s1 * c + sg.s2 * s, sg.s1 * s - sg.s2 * c, -sg.s3;
  return m;
}

Eigen::Vector2d c_vector(double omega, double sigma4) {
  return {-sigma4 * omega * omega, -sigma4 * omega * omega};
}

namespace {

// Desired acceleration plus PID correction (the bracket of the control law).
Eigen::Vector3d pid_bracket(const TrackingErrorState& err,
                            const Eigen::Vector3d& pddot_d,
                            const GainSet& gains) {
  return pddot_d + gains.Kp().cwiseProduct(err.e) +
         gains.Ki().cwiseProduct(err.e_int) +
         gains.Kd().cwiseProduct(err.e_dot);
}

Eigen::Vector2d wheel_rates_from_pdot(double theta,
                                      const Eigen::Vector3d& pdot, double R,
                                      double W) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double lon = c * pdot[0] + s * pdot[1];
  return {(lon + W / 2.0 * pdot[2]) / R, (lon - W / 2.0 * pdot[2]) / R};
}

}  // namespace

WheelTorques ctc_torque(const TrackingErrorState& err,
                        const Eigen::Vector3d& pddot_d, double theta,
                        const Eigen::Vector3d& pdot,
                        const PhysicalParams& phys, const GainSet& gains,
                        double R, double W) {
  const Eigen::Vector3d w = pid_bracket(err, pddot_d, gains);
  const Eigen::Vector2d phidot = wheel_rates_from_pdot(theta, pdot, R, W);
  Eigen::Vector2d u = m_matrix(theta, phys.sigma) * w +
                      c_vector(pdot[2], phys.sigma.s4) + phys.cV * phidot;
  u[0] += phys.cD * sgn_deadband(phidot[0]);
  u[1] += phys.cD * sgn_deadband(phidot[1]);
  return {u[0], u[1]};
}

WheelTorques gctc_action(const AgentState& s, const PolicyParams& pi,
                         const ConstraintBox& box, double eps, double R,
                         double W) {
  const PhysicalParams phys = constrain_params(pi, box);
  const GainSet gains = gains_from_poles(pi.alpha, pi.beta, eps);
  TrackingErrorState err{s.e, s.e_int, s.e_dot};
  return ctc_torque(err, s.pddot_d, s.theta, s.chassis_rates, phys, gains, R,
                    W);
}

Mat28 gctc_jacobian(const AgentState& s, const PolicyParams& pi,
                    const ConstraintBox& box, double eps, double R,
                    double W) {
  const PhysicalParams phys = constrain_params(pi, box);
  const GainSet gains = gains_from_poles(pi.alpha, pi.beta, eps);
  const TrackingErrorState err{s.e, s.e_int, s.e_dot};
  const Eigen::Vector3d w = pid_bracket(err, s.pddot_d, gains);
  const Mat23 M = m_matrix(s.theta, phys.sigma);
  const Eigen::Vector2d phidot =
      wheel_rates_from_pdot(s.theta, s.chassis_rates, R, W);

  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double omega = s.chassis_rates[2];

  Mat28 J = Mat28::Zero();

  // Columns 0..2: z1..z3 through dM/dsigma_i.
  Mat23 dM1, dM2, dM3;
  dM1 << c, sn, 0.0, c, sn, 0.0;
  dM2 << -sn, c, 0.0, sn, -c, 0.0;
  dM3 << 0.0, 0.0, 1.0, 0.0, 0.0, -1.0;
  J.col(0) = (dM1 * w) * (box.sigma_radius[0] * sech2(pi.z[0]));
  J.col(1) = (dM2 * w) * (box.sigma_radius[1] * sech2(pi.z[1]));
  J.col(2) = (dM3 * w) * (box.sigma_radius[2] * sech2(pi.z[2]));

  // Column 3: z4 through C(omega).
  J.col(3) = Eigen::Vector2d(-omega * omega, -omega * omega) *
             (box.sigma_radius[3] * sech2(pi.z[3]));

  // Columns 4, 5: friction coefficients. The Coulomb sign is piecewise
  // constant in the parameters, so only the magnitudes differentiate.
  J.col(4) = phidot * (box.cV_radius * sech2(pi.zV));
  J.col(5) = Eigen::Vector2d(sgn_deadband(phidot[0]), sgn_deadband(phidot[1])) *
             (box.cD_radius * sech2(pi.zD));

  // Columns 6, 7: pole parameters through the gain polynomials.
  const double a = pi.alpha * pi.alpha + eps;
  const double b = pi.beta * pi.beta + eps;
  Eigen::Vector3d dw_da = Eigen::Vector3d::Zero();
  dw_da[0] = 6.0 * a * s.e[0] + 3.0 * a * a * s.e_int[0] + 3.0 * s.e_dot[0];
  dw_da[1] = 6.0 * a * s.e[1] + 3.0 * a * a * s.e_int[1] + 3.0 * s.e_dot[1];
  Eigen::Vector3d dw_db = Eigen::Vector3d::Zero();
  dw_db[2] = 6.0 * b * s.e[2] + 3.0 * b * b * s.e_int[2] + 3.0 * s.e_dot[2];
  J.col(6) = M * dw_da * (2.0 * pi.alpha);
  J.col(7) = M * dw_db * (2.0 * pi.beta);

  return J;
}

}  // namespace ddmr
