#include "ddmr/trajectories.hpp"

#include <cmath>

namespace ddmr {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_sinusoid(const SinusoidSpec& s) {
  if (!(s.forward_speed > 0.0) || !(s.amplitude > 0.0) ||
      !(s.wavelength > 0.0)) {
    throw ValidationError("SinusoidSpec: speed, amplitude, wavelength must be > 0");
  }
}

void validate_circle(const CircleSpec& c) {
  if (!(c.radius > 0.0) || !(c.base_rate > 0.0)) {
    throw ValidationError("CircleSpec: radius and base_rate must be > 0");
  }
  if (c.rate_mod_amp < 0.0 || !(c.rate_mod_freq > 0.0)) {
    throw ValidationError("CircleSpec: rate_mod_amp >= 0, rate_mod_freq > 0");
  }
  // Keep the polar rate positive so the tangent heading is well defined.
  if (!(c.base_rate > c.rate_mod_amp)) {
    throw ValidationError("CircleSpec: base_rate must exceed rate_mod_amp");
  }
}

void validate_square(const SquareSpec& q) {
  if (!(q.side > 0.0) || !(q.corner_radius > 0.0) || !(q.speed > 0.0)) {
    throw ValidationError("SquareSpec: side, corner_radius, speed must be > 0");
  }
  if (!(q.corner_radius < q.side / 2.0)) {
    throw ValidationError("SquareSpec: corner_radius must be < side/2");
  }
}

TrajectorySample sample_sinusoid(const SinusoidSpec& spec, double t) {
  const double k = 2.0 * kPi / spec.wavelength;
  const double sp = spec.forward_speed;
  const double x = sp * t;
  const double kx = k * x;

  const double xd = sp;
  const double yd = spec.amplitude * k * sp * std::cos(kx);
  const double xdd = 0.0;
  const double ydd = -spec.amplitude * k * k * sp * sp * std::sin(kx);
  const double xddd = 0.0;
  const double yddd = -spec.amplitude * k * k * k * sp * sp * sp * std::cos(kx);

  const double v2 = xd * xd + yd * yd;
  const double cross = xd * ydd - yd * xdd;
  const double cross_dot = xd * yddd - yd * xddd;
  const double v2_dot = 2.0 * (xd * xdd + yd * ydd);

  TrajectorySample out;
  out.p << x, spec.amplitude * std::sin(kx), std::atan2(yd, xd);
  out.pdot << xd, yd, cross / v2;
  out.pddot << xdd, ydd, cross_dot / v2 - cross * v2_dot / (v2 * v2);
  out.v = std::sqrt(v2);
  out.omega = out.pdot[2];
  return out;
}

TrajectorySample sample_circle(const CircleSpec& spec, double t) {
  const double w0 = spec.base_rate;
  const double w1 = spec.rate_mod_amp;
  const double nu = spec.rate_mod_freq;
  const double rho = spec.radius;

  const double phi = w0 * t + w1 / nu * (1.0 - std::cos(nu * t));
  const double phid = w0 + w1 * std::sin(nu * t);
  const double phidd = w1 * nu * std::cos(nu * t);

  const double c = std::cos(phi);
  const double s = std::sin(phi);

  TrajectorySample out;
  out.p << rho * c, rho * s, phi + kPi / 2.0;
  out.pdot << -rho * phid * s, rho * phid * c, phid;
  out.pddot << -rho * (phidd * s + phid * phid * c),
               rho * (phidd * c - phid * phid * s), phidd;
  out.v = rho * phid;
  out.omega = phid;
  return out;
}

TrajectorySample sample_square(const SquareSpec& spec, double t) {
  const double L = spec.side;
  const double r = spec.corner_radius;
  const double sp = spec.speed;
  const double h = L / 2.0;
  const double straight = L - 2.0 * r;   // full side between tangent points
  const double half = h - r;             // first/last bottom-side pieces
  const double q = kPi / 2.0 * r;        // quarter-arc length
  const double perim = 4.0 * L - 8.0 * r + 2.0 * kPi * r;

  double s = sp * t;
  const double laps = std::floor(s / perim);
  s -= laps * perim;

  // Piece table, counterclockwise from (0, -h) heading +x.
  // type 0 = straight {start x, start y, heading}, type 1 = arc {cx, cy,
  // start angle}; heading on an arc is angle + pi/2.
  struct Piece {
    int type;
    double len;
    double a, b, c;
  };
  const Piece pieces[9] = {
      {0, half, 0.0, -h, 0.0},
      {1, q, half, -half, -kPi / 2.0},
      {0, straight, h, -half, kPi / 2.0},
      {1, q, half, half, 0.0},
      {0, straight, half, h, kPi},
      {1, q, -half, half, kPi / 2.0},
      {0, straight, -h, half, 3.0 * kPi / 2.0},
      {1, q, -half, -half, kPi},
      {0, half, -half, -h, 2.0 * kPi},
  };

  double base_heading = 2.0 * kPi * laps;
  double acc = 0.0;
  TrajectorySample out;
  out.v = sp;
  for (const Piece& pc : pieces) {
    if (s <= acc + pc.len || &pc == &pieces[8]) {
      const double d = s - acc;
      if (pc.type == 0) {
        const double th = base_heading + pc.c;
        const double ct = std::cos(pc.c);
        const double st = std::sin(pc.c);
        out.p << pc.a + d * ct, pc.b + d * st, th;
        out.pdot << sp * ct, sp * st, 0.0;
        out.pddot.setZero();
        out.omega = 0.0;
      } else {
        const double ang = pc.c + d / r;
        const double th = base_heading + ang + kPi / 2.0;
        const double ca = std::cos(ang);
        const double sa = std::sin(ang);
        out.p << pc.a + r * ca, pc.b + r * sa, th;
        out.pdot << -sp * sa, sp * ca, sp / r;
        out.pddot << -sp * sp / r * ca, -sp * sp / r * sa, 0.0;
        out.omega = sp / r;
      }
      return out;
    }
    acc += pc.len;
  }
  return out;  // unreachable
}

}  // namespace

void validate(const TrajectorySpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SinusoidSpec>) {
          validate_sinusoid(s);
        } else if constexpr (std::is_same_v<T, CircleSpec>) {
          validate_circle(s);
        } else {
          validate_square(s);
        }
      },
      spec);
}

TrajectorySample sample(const TrajectorySpec& spec, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ValidationError("sample: t must be finite and >= 0");
  }
  validate(spec);
  return std::visit(
      [t](const auto& s) -> TrajectorySample {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SinusoidSpec>) {
          return sample_sinusoid(s, t);
        } else if constexpr (std::is_same_v<T, CircleSpec>) {
          return sample_circle(s, t);
        } else {
          return sample_square(s, t);
        }
      },
      spec);
}

double square_perimeter(const SquareSpec& spec) {
  return 4.0 * spec.side - 8.0 * spec.corner_radius +
         2.0 * kPi * spec.corner_radius;
}

TrajectorySuite default_suite() {
  TrajectorySuite suite;
  suite.train = SinusoidSpec{1.0, 1.0, 4.0};
  suite.tests[0] = SinusoidSpec{2.0, 1.0, 4.0};
  suite.tests[1] = CircleSpec{2.0, 0.5, 0.25, 0.5};
  suite.tests[2] = SquareSpec{3.0, 0.6, 1.0};
  return suite;
}

}  // namespace ddmr
