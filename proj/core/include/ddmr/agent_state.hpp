#pragma once

#include <Eigen/Dense>

namespace ddmr {

using Vec16 = Eigen::Matrix<double, 16, 1>;

/// The 16-dimensional observation fed to the policy and critics.
///
/// Packing order (serialization contract, fixed):
///   [0..2]   e            tracking error (x, y, wrapped heading)
///   [3..5]   e_int        clamped integral of e
///   [6..8]   e_dot        d/dt of e
///   [9..11]  chassis rates (xdot, ydot, omega)
///   [12..14] pddot_d      desired posture acceleration
///   [15]     theta        heading, unwrapped
struct AgentState {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_int = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_dot = Eigen::Vector3d::Zero();
  Eigen::Vector3d chassis_rates = Eigen::Vector3d::Zero();
  Eigen::Vector3d pddot_d = Eigen::Vector3d::Zero();
  double theta = 0.0;

  Vec16 pack() const {
    Vec16 v;
    v << e, e_int, e_dot, chassis_rates, pddot_d, theta;
    return v;
  }

  static AgentState unpack(const Vec16& v) {
    AgentState s;
    s.e = v.segment<3>(0);
    s.e_int = v.segment<3>(3);
    s.e_dot = v.segment<3>(6);
    s.chassis_rates = v.segment<3>(9);
    s.pddot_d = v.segment<3>(12);
    s.theta = v[15];
    return s;
  }
};

}  // namespace ddmr
