#pragma once

// Closed-form families for V(x,t) and the packet trajectory d(t), with exact
// derivatives. All motions are normalized to d(0) = 0 at construction.

#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"

namespace nonspread {

// ---------------------------------------------------------------- forces

struct ForceConstant {
  double F0 = 0.0;
};
struct ForceSinusoid {
  double F0 = 0.0;
  double nu = 1.0;
  double phase = 0.0;
};
struct ForceTabulated {
  double t0 = 0.0;
  double dt = 0.0;
  real_array values;
};
using ForceSpec = std::variant<ForceConstant, ForceSinusoid, ForceTabulated>;

inline ForceTabulated make_force_tabulated(double t0, double dt, real_array values) {
  if (!(dt > 0.0) || values.size() < 4)
    throw InvalidSpec("ForceTabulated: need dt > 0 and at least 4 samples");
  return ForceTabulated{t0, dt, std::move(values)};
}

inline double force_value(const ForceSpec& spec, double t) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ForceConstant>) return f.F0;
        else if constexpr (std::is_same_v<T, ForceSinusoid>)
          return f.F0 * std::sin(f.nu * t + f.phase);
        else {
          const double t_end = f.t0 + f.dt * (f.values.size() - 1);
          if (t < f.t0 - 1e-12 || t > t_end + 1e-12)
            throw TimeOutOfRange("force_value: t outside tabulated range");
          return cubic_interp(f.t0, f.dt, f.values, t);
        }
      },
      spec);
}

// ---------------------------------------------------------------- motions

struct MotionRest {};
struct MotionPolynomial {
  real_array coeffs;  // d = sum coeffs[k] t^k; coeffs[0] forced to 0
};
struct MotionSinusoid {
  // d = x0 sin(omega t + phase) - x0 sin(phase)
  double x0 = 0.0;
  double omega = 1.0;
  double phase = 0.0;
};
struct MotionConstantAccel {
  // d = B^3 t^2 / (4 m^2), the uniformly accelerating free-space trajectory.
  double B = 0.0;
  double mass = 1.0;
};
struct MotionNumeric {
  double t0 = 0.0;
  double dt = 0.0;
  real_array d, d_dot, d_ddot;
};
using MotionSpec = std::variant<MotionRest, MotionPolynomial, MotionSinusoid,
                                MotionConstantAccel, MotionNumeric>;

struct MotionState {
  double d = 0.0;
  double d_dot = 0.0;
  double d_ddot = 0.0;
};

inline MotionPolynomial make_motion_polynomial(real_array coeffs) {
  if (!coeffs.empty()) coeffs[0] = 0.0;  // d(0) = 0 normalization
  return MotionPolynomial{std::move(coeffs)};
}

inline MotionConstantAccel make_motion_constant_accel(double B, double mass) {
  if (!(mass > 0.0)) throw InvalidSpec("MotionConstantAccel: mass must be > 0");
  return MotionConstantAccel{B, mass};
}

inline MotionNumeric make_motion_numeric(double t0, double dt, real_array d,
                                         real_array d_dot, real_array d_ddot) {
  const std::size_t n = d.size();
  if (!(dt > 0.0) || n < 4 || d_dot.size() != n || d_ddot.size() != n)
    throw InvalidSpec("MotionNumeric: need dt > 0 and equal-length arrays (>= 4)");
  const double shift = d[0];
  for (double& v : d) v -= shift;  // d(0) = 0 normalization
  // d_ddot must be the curvature of d: compare against second differences.
  double scale = 0.0;
  for (double v : d_ddot) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double second = (d[i - 1] - 2.0 * d[i] + d[i + 1]) / (dt * dt);
    if (std::abs(second - d_ddot[i]) > 1e-6 * scale + 1e-4 * dt * dt * scale)
      throw InvalidSpec("MotionNumeric: d_ddot inconsistent with d");
  }
  return MotionNumeric{t0, dt, std::move(d), std::move(d_dot), std::move(d_ddot)};
}

inline MotionState motion_eval(const MotionSpec& spec, double t) {
  return std::visit(
      [&](const auto& m) -> MotionState {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MotionRest>) {
          return {0.0, 0.0, 0.0};
        } else if constexpr (std::is_same_v<T, MotionPolynomial>) {
          MotionState s;
          double tp = 1.0;
          for (std::size_t k = 0; k < m.coeffs.size(); ++k) {
            s.d += m.coeffs[k] * tp;
            if (k >= 1) s.d_dot += k * m.coeffs[k] * (k == 1 ? 1.0 : std::pow(t, k - 1.0));
            if (k >= 2)
              s.d_ddot += k * (k - 1.0) * m.coeffs[k] * (k == 2 ? 1.0 : std::pow(t, k - 2.0));
            tp *= t;
          }
          return s;
        } else if constexpr (std::is_same_v<T, MotionSinusoid>) {
          const double a = m.omega * t + m.phase;
          return {m.x0 * (std::sin(a) - std::sin(m.phase)),
                  m.x0 * m.omega * std::cos(a),
                  -m.x0 * m.omega * m.omega * std::sin(a)};
        } else if constexpr (std::is_same_v<T, MotionConstantAccel>) {
          const double acc = m.B * m.B * m.B / (2.0 * m.mass * m.mass);
          return {0.5 * acc * t * t, acc * t, acc};
        } else {
          const double t_end = m.t0 + m.dt * (m.d.size() - 1);
          if (t < m.t0 - 1e-12 || t > t_end + 1e-12)
            throw TimeOutOfRange("motion_eval: t outside numeric lattice");
          return {cubic_interp(m.t0, m.dt, m.d, t),
                  cubic_interp(m.t0, m.dt, m.d_dot, t),
                  cubic_interp(m.t0, m.dt, m.d_ddot, t)};
        }
      },
      spec);
}

// -------------------------------------------------------------- potentials

struct FreeSpace {};
struct UniformForce {
  ForceSpec force;  // V = -F(t) x
};
struct Harmonic {
  // V = (1/2) m omega(t)^2 x^2 with omega(t) = omega0 (1 + omega_ramp * t)
  double omega0 = 1.0;
  double omega_ramp = 0.0;
};
struct PowerLaw {
  double lambda = 1.0;
  int n = 4;  // V = lambda x^n, n >= 3
};
struct MovingHarmonicDriven {
  // (1/2) m omega^2 (x - d)^2 - m x d_ddot - (1/2) m omega^2 x0^2 sin^2(omega t)
  double omega = 1.0;
  MotionSpec motion = MotionRest{};
  double offset_amplitude = 0.0;  // the x0 of the literal third term
};
struct MovingQuarticDriven {
  // lambda (x - d)^4 - m x d_ddot
  double lambda = 1.0;
  MotionSpec motion = MotionRest{};
};
using RealPotential = std::variant<FreeSpace, UniformForce, Harmonic, PowerLaw,
                                   MovingHarmonicDriven, MovingQuarticDriven>;

// A real base plus an optional constant absorbing term -i*gamma. gamma = 0
// means the potential is real; the absorber variant is the only complex one.
struct PotentialSpec {
  RealPotential real = FreeSpace{};
  double absorber_gamma = 0.0;

  bool is_real() const { return absorber_gamma == 0.0; }
};

inline PowerLaw make_power_law(double lambda, int n) {
  if (n < 3) throw InvalidSpec("PowerLaw: n must be >= 3");
  return PowerLaw{lambda, n};
}

inline PotentialSpec make_absorber(RealPotential base, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidSpec("ComplexAbsorber: gamma must be >= 0");
  return PotentialSpec{std::move(base), gamma};
}

namespace detail {
inline double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}
}  // namespace detail

inline double real_potential_value(const RealPotential& pot, double x, double t,
                                   const UnitSystem& units) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, UniformForce>) {
          return -force_value(p.force, t) * x;
        } else if constexpr (std::is_same_v<T, Harmonic>) {
          const double w = p.omega0 * (1.0 + p.omega_ramp * t);
          return 0.5 * units.mass * w * w * x * x;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return p.lambda * detail::ipow(x, p.n);
        } else if constexpr (std::is_same_v<T, MovingHarmonicDriven>) {
          const MotionState s = motion_eval(p.motion, t);
          const double q = x - s.d;
          const double sn = std::sin(p.omega * t);
          return 0.5 * units.mass * p.omega * p.omega * q * q -
                 units.mass * x * s.d_ddot -
                 0.5 * units.mass * p.omega * p.omega * p.offset_amplitude *
                     p.offset_amplitude * sn * sn;
        } else {
          const MotionState s = motion_eval(p.motion, t);
          const double q = x - s.d;
          return p.lambda * q * q * q * q - units.mass * x * s.d_ddot;
        }
      },
      pot);
}

inline std::complex<double> potential_value(const PotentialSpec& spec, double x,
                                            double t, const UnitSystem& units) {
  return {real_potential_value(spec.real, x, t, units), -spec.absorber_gamma};
}

}  // namespace nonspread
