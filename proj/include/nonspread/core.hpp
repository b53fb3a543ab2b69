#pragma once

// Units, uniform spatial grid, and the complex wavefunction container.

#include <cmath>
#include <complex>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/errors.hpp"

namespace nonspread {

struct UnitSystem {
  double hbar = 1.0;
  double mass = 1.0;
};

inline void validate(const UnitSystem& u) {
  if (!(u.hbar > 0.0) || !std::isfinite(u.hbar) || !(u.mass > 0.0) ||
      !std::isfinite(u.mass))
    throw InvalidSpec("UnitSystem: hbar and mass must be positive and finite");
}

struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_points = 0;
  double dx = 0.0;

  double x(int i) const { return x_min + i * dx; }
  friend bool operator==(const Grid& a, const Grid& b) {
    return a.x_min == b.x_min && a.x_max == b.x_max && a.n_points == b.n_points;
  }
};

inline Grid make_grid(double x_min, double x_max, int n_points) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max) ||
      n_points < 16)
    throw InvalidGrid("make_grid: require finite x_min < x_max and n_points >= 16");
  return Grid{x_min, x_max, n_points, (x_max - x_min) / (n_points - 1)};
}

struct WaveFunction {
  Grid grid;
  complex_array values;
  double time = 0.0;
};

inline std::complex<double> inner_product(const WaveFunction& a,
                                          const WaveFunction& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("inner_product: grids differ");
  complex_array prod(a.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i)
    prod[i] = std::conj(a.values[i]) * b.values[i];
  return trapezoid(prod, a.grid.dx);
}

// \int |psi|^2 dx (what the metrics call "norm").
inline double probability(const WaveFunction& a) {
  real_array dens(a.values.size());
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(a.values[i]);
  return trapezoid(dens, a.grid.dx);
}

inline double l2_norm(const WaveFunction& a) { return std::sqrt(probability(a)); }

// Central second difference; second-order one-sided stencils at the ends.
template <typename T>
std::vector<T> second_derivative_samples(const std::vector<T>& f, double dx) {
  const std::size_t n = f.size();
  if (n < 4) throw InvalidSpec("second_derivative: need at least 4 samples");
  std::vector<T> out(n);
  const double inv = 1.0 / (dx * dx);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv;
  out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
  out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
  return out;
}

inline complex_array second_derivative(const WaveFunction& psi) {
  return second_derivative_samples(psi.values, psi.grid.dx);
}

}  // namespace nonspread
