#pragma once

#include <array>
#include <variant>

#include <Eigen/Dense>

#include "ddmr/errors.hpp"

namespace ddmr {

/// One point of a reference trajectory: desired posture, its first two time
/// derivatives, and the matching forward/turn rates. theta is the tangent
/// heading atan2(ydot, xdot), unwrapped continuously in t.
struct TrajectorySample {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();       // x_d, y_d, theta_d
  Eigen::Vector3d pdot = Eigen::Vector3d::Zero();    // m/s, m/s, rad/s
  Eigen::Vector3d pddot = Eigen::Vector3d::Zero();   // m/s^2, m/s^2, rad/s^2
  double v = 0.0;      // forward speed (m/s)
  double omega = 0.0;  // heading rate (rad/s)
};

/// y = amplitude * sin(2*pi*x/wavelength), x = forward_speed * t.
struct SinusoidSpec {
  double forward_speed = 1.0;  // m/s
  double amplitude = 1.0;      // m
  double wavelength = 4.0;     // m
};

/// Circle of fixed radius traversed at polar rate
/// base_rate + rate_mod_amp * sin(rate_mod_freq * t).
struct CircleSpec {
  double radius = 2.0;         // m
  double base_rate = 0.5;      // rad/s
  double rate_mod_amp = 0.25;  // rad/s
  double rate_mod_freq = 0.5;  // rad/s
};

/// Counterclockwise square with quarter-circle corner arcs, traversed at
/// constant speed, starting at the bottom-side midpoint heading +x.
struct SquareSpec {
  double side = 3.0;           // m
  double corner_radius = 0.6;  // m
  double speed = 1.0;          // m/s
};

using TrajectorySpec = std::variant<SinusoidSpec, CircleSpec, SquareSpec>;

/// Throws ValidationError if lengths/speeds are not positive, the circle
/// rate can change sign, or corner_radius >= side/2.
void validate(const TrajectorySpec& spec);

/// Closed-form evaluation at time t >= 0.
TrajectorySample sample(const TrajectorySpec& spec, double t);

/// Path length of one square lap: 4*side - 8*r + 2*pi*r.
double square_perimeter(const SquareSpec& spec);

struct TrajectorySuite {
  TrajectorySpec train;
  std::array<TrajectorySpec, 3> tests;
};

/// The shipped suite: training sinusoid plus the three evaluation paths
/// (high-velocity sinusoid, speed-modulated circle, rounded square).
TrajectorySuite default_suite();

}  // namespace ddmr
