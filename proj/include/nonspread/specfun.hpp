#pragma once

// Airy Ai and harmonic-oscillator eigenfunctions, accurate to ~1e-13 absolute
// over the argument ranges the packet constructions use.

#include <cmath>
#include <numbers>

#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"

namespace nonspread {

struct SpecFunAccuracy {
  double abs_tol = 1e-10;
  double series_asymptotic_switch = 5.0;
};

namespace detail {

inline constexpr long double kAi0 = 0.35502805388781723926L;    // 3^(-2/3)/Gamma(2/3)
inline constexpr long double kAiPrime0 = -0.25881940379280679840L;  // -3^(-1/3)/Gamma(1/3)

// Maclaurin evaluation: Ai = Ai(0)*f(x) + Ai'(0)*g(x) with the two standard
// auxiliary series. Long-double accumulation keeps the alternating-series
// cancellation on the negative axis below ~1e-13 out to |x| ~ 9.
inline long double airy_series(long double x) {
  const long double x3 = x * x * x;
  long double f_term = 1.0L, f_sum = 1.0L;
  long double g_term = x, g_sum = x;
  for (int k = 1; k < 400; ++k) {
    f_term *= x3 / ((3.0L * k - 1.0L) * (3.0L * k));
    g_term *= x3 / ((3.0L * k) * (3.0L * k + 1.0L));
    f_sum += f_term;
    g_sum += g_term;
    if (std::abs(f_term) <= 1e-20L * std::abs(f_sum) &&
        std::abs(g_term) <= 1e-20L * std::abs(g_sum))
      break;
  }
  return kAi0 * f_sum + kAiPrime0 * g_sum;
}

// Poincare expansion for x >> 0: Ai ~ exp(-zeta) / (2 sqrt(pi) x^{1/4}) * S,
// with u_k = u_{k-1} (6k-1)(6k-5) / (72 k) and zeta = (2/3) x^{3/2}.
inline long double airy_asymptotic_pos(long double x) {
  const long double zeta = 2.0L / 3.0L * std::pow(x, 1.5L);
  long double term = 1.0L, sum = 1.0L, prev = 1e30L;
  for (int k = 1; k < 60; ++k) {
    term *= (6.0L * k - 1.0L) * (6.0L * k - 5.0L) / (72.0L * k);
    const long double contrib = term / std::pow(zeta, static_cast<long double>(k));
    if (std::abs(contrib) >= prev) break;  // asymptotic series turned
    sum += (k % 2 ? -1.0L : 1.0L) * contrib;
    prev = std::abs(contrib);
    if (prev < 1e-20L) break;
  }
  const long double pref =
      std::exp(-zeta) / (2.0L * std::sqrt(std::numbers::pi_v<long double>) *
                         std::pow(x, 0.25L));
  return pref * sum;
}

// Oscillatory expansion for x << 0 (z = -x):
// Ai(-z) ~ pi^{-1/2} z^{-1/4} [ sin(zeta + pi/4) * P - cos(zeta + pi/4) * Q ],
// P = sum (-1)^k u_{2k} zeta^{-2k}, Q = sum (-1)^k u_{2k+1} zeta^{-2k-1}.
inline long double airy_asymptotic_neg(long double z) {
  const long double zeta = 2.0L / 3.0L * std::pow(z, 1.5L);
  long double u = 1.0L;  // u_j as j advances
  long double P = 1.0L, Q = 0.0L, prev = 1e30L;
  int sign = 1;
  for (int j = 1; j < 80; ++j) {
    u *= (6.0L * j - 1.0L) * (6.0L * j - 5.0L) / (72.0L * j);
    const long double contrib = u / std::pow(zeta, static_cast<long double>(j));
    if (std::abs(contrib) >= prev) break;
    if (j % 2 == 1)
      Q += sign * contrib;  // odd j joins Q with sign (-1)^{(j-1)/2}
    else {
      sign = -sign;         // even j starts the next (-1)^k pair
      P += sign * contrib;
    }
    prev = std::abs(contrib);
    if (prev < 1e-20L) break;
  }
  const long double arg = zeta + std::numbers::pi_v<long double> / 4.0L;
  const long double pref =
      1.0L / (std::sqrt(std::numbers::pi_v<long double>) * std::pow(z, 0.25L));
  return pref * (std::sin(arg) * P - std::cos(arg) * Q);
}

}  // namespace detail

inline double airy_ai(double x, const SpecFunAccuracy& acc = {}) {
  if (!std::isfinite(x)) throw DomainOverflow("airy_ai: non-finite argument");
  if (x < -1e6)
    throw DomainOverflow("airy_ai: oscillation phase unresolvable below -1e6");
  if (x >= 0.0) {
    if (x > 110.0) return 0.0;  // exp(-zeta) underflows anyway
    if (x <= acc.series_asymptotic_switch)
      return static_cast<double>(detail::airy_series(x));
    return static_cast<double>(detail::airy_asymptotic_pos(x));
  }
  // The oscillatory expansion only reaches ~2e-9 at |x| = 5; the series in
  // long double is good to ~1e-13 out to 9, so the negative-side switch is
  // clamped there to honour abs_tol = 1e-10.
  const double neg_switch = std::max(acc.series_asymptotic_switch, 9.0);
  if (-x < neg_switch) return static_cast<double>(detail::airy_series(x));
  return static_cast<double>(detail::airy_asymptotic_neg(-x));
}

// L2-normalized oscillator eigenfunction psi_n(x) for -hbar^2/(2m) psi'' +
// (1/2) m omega^2 x^2 psi = E psi, via the normalized Hermite-function
// recurrence (stable far beyond n = 50; raw Hermite polynomials overflow).
inline double sho_eigenfunction(int n, double x, const UnitSystem& units,
                                double omega) {
  if (n < 0) throw IndexTooLarge("sho_eigenfunction: n must be >= 0");
  if (n > 50) throw IndexTooLarge("sho_eigenfunction: n > 50 unsupported");
  validate(units);
  if (!(omega > 0.0)) throw InvalidSpec("sho_eigenfunction: omega must be > 0");
  const double a = units.mass * omega / units.hbar;  // 1/length^2
  const double xi = std::sqrt(a) * x;
  const double h0 = std::pow(a / std::numbers::pi, 0.25) * std::exp(-0.5 * xi * xi);
  if (n == 0) return h0;
  double prev = h0;
  double cur = std::sqrt(2.0) * xi * h0;
  for (int k = 1; k < n; ++k) {
    const double next =
        std::sqrt(2.0 / (k + 1.0)) * xi * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace nonspread
