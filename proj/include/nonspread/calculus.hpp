#pragma once

// Discrete calculus helpers shared by every module: trapezoid quadrature,
// fourth-order cumulative Simpson, uniform-grid cubic resampling, and a
// Legendre-basis polynomial least-squares fit.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "nonspread/errors.hpp"

namespace nonspread {

using real_array = std::vector<double>;
using complex_array = std::vector<std::complex<double>>;

template <typename T>
T trapezoid(const std::vector<T>& f, double dx) {
  if (f.size() < 2) return T{};
  T acc{};
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return dx * (acc + 0.5 * (f.front() + f.back()));
}

// Cumulative integral I[i] = \int_{x_0}^{x_i} f dx on a uniform lattice.
// Even endpoints use composite Simpson; odd ones close with a 3/8 rule over
// the last three panels (the first interval uses the one-sided parabola),
// keeping every entry fourth-order accurate.
inline real_array cumulative_simpson(const real_array& f, double h) {
  const std::size_t n = f.size();
  real_array I(n, 0.0);
  if (n < 2) return I;
  if (n == 2) {
    I[1] = 0.5 * h * (f[0] + f[1]);
    return I;
  }
  I[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  for (std::size_t i = 2; i < n; ++i) {
    if (i % 2 == 0)
      I[i] = I[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    else
      I[i] = I[i - 3] +
             3.0 * h / 8.0 * (f[i - 3] + 3.0 * f[i - 2] + 3.0 * f[i - 1] + f[i]);
  }
  return I;
}

// Four-point Lagrange interpolation on a uniform lattice starting at x0.
// Stencils are clamped at the ends; exact for cubics everywhere.
template <typename T>
T cubic_interp(double x0, double dx, const std::vector<T>& y, double x) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  if (n < 4) throw InvalidSpec("cubic_interp: need at least 4 samples");
  const double s = (x - x0) / dx;
  std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  if (i0 < 0) i0 = 0;
  if (i0 > n - 4) i0 = n - 4;
  const double u = s - static_cast<double>(i0);
  const double w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return w0 * y[i0] + w1 * y[i0 + 1] + w2 * y[i0 + 2] + w3 * y[i0 + 3];
}

struct PolyFit {
  real_array coeffs;   // monomial coefficients c0..cK in the original variable
  double rms_residual = 0.0;
};

namespace detail {

// Solve the (K+1)x(K+1) SPD system G c = b in place via Cholesky.
inline void cholesky_solve(std::vector<long double>& G, std::vector<long double>& b,
                           int m) {
  for (int j = 0; j < m; ++j) {
    long double d = G[j * m + j];
    for (int k = 0; k < j; ++k) d -= G[j * m + k] * G[j * m + k];
    if (d <= 0.0L) throw SolverBreakdown("polynomial fit: Gram matrix not SPD");
    d = std::sqrt(d);
    G[j * m + j] = d;
    for (int i = j + 1; i < m; ++i) {
      long double s = G[i * m + j];
      for (int k = 0; k < j; ++k) s -= G[i * m + k] * G[j * m + k];
      G[i * m + j] = s / d;
    }
  }
  for (int i = 0; i < m; ++i) {
    long double s = b[i];
    for (int k = 0; k < i; ++k) s -= G[i * m + k] * b[k];
    b[i] = s / G[i * m + i];
  }
  for (int i = m - 1; i >= 0; --i) {
    long double s = b[i];
    for (int k = i + 1; k < m; ++k) s -= G[k * m + i] * b[k];
    b[i] = s / G[i * m + i];
  }
}

}  // namespace detail

// Least-squares polynomial fit of degree K. Internally uses the Legendre
// basis on the affinely rescaled abscissa (well conditioned on uniform
// samples), then converts back to monomials in x.
inline PolyFit fit_polynomial(const real_array& x, const real_array& y, int degree) {
  if (x.size() != y.size() || x.size() < static_cast<std::size_t>(degree + 1))
    throw InvalidSpec("fit_polynomial: need more samples than coefficients");
  const int m = degree + 1;
  const double a = x.front(), b = x.back();
  if (!(b > a)) throw InvalidSpec("fit_polynomial: degenerate abscissa range");
  const double alpha = 2.0 / (b - a);
  const double beta = -(a + b) / (b - a);  // s = alpha*x + beta in [-1, 1]

  std::vector<long double> G(static_cast<std::size_t>(m) * m, 0.0L);
  std::vector<long double> rhs(m, 0.0L);
  std::vector<long double> P(m);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double s = alpha * static_cast<long double>(x[i]) + beta;
    P[0] = 1.0L;
    if (m > 1) P[1] = s;
    for (int k = 2; k < m; ++k)
      P[k] = ((2 * k - 1) * s * P[k - 1] - (k - 1) * P[k - 2]) / k;
    for (int j = 0; j < m; ++j) {
      rhs[j] += P[j] * y[i];
      for (int k = 0; k <= j; ++k) G[j * m + k] += P[j] * P[k];
    }
  }
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) G[j * m + k] = G[k * m + j];
  detail::cholesky_solve(G, rhs, m);

  // Legendre coefficients -> monomials in s.
  std::vector<std::vector<long double>> leg(m);
  leg[0] = {1.0L};
  if (m > 1) leg[1] = {0.0L, 1.0L};
  for (int k = 2; k < m; ++k) {
    leg[k].assign(k + 1, 0.0L);
    for (int j = 0; j <= k - 1; ++j)
      leg[k][j + 1] += (2 * k - 1) * leg[k - 1][j] / k;
    for (int j = 0; j <= k - 2; ++j) leg[k][j] -= (k - 1) * leg[k - 2][j] / k;
  }
  std::vector<long double> mono_s(m, 0.0L);
  for (int k = 0; k < m; ++k)
    for (std::size_t j = 0; j < leg[k].size(); ++j) mono_s[j] += rhs[k] * leg[k][j];

  // Substitute s = alpha*x + beta.
  std::vector<long double> out(m, 0.0L), pw = {1.0L};
  for (int k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < pw.size(); ++j) out[j] += mono_s[k] * pw[j];
    std::vector<long double> next(pw.size() + 1, 0.0L);
    for (std::size_t j = 0; j < pw.size(); ++j) {
      next[j] += beta * pw[j];
      next[j + 1] += alpha * pw[j];
    }
    pw = std::move(next);
  }

  PolyFit fit;
  fit.coeffs.assign(m, 0.0);
  for (int k = 0; k < m; ++k) fit.coeffs[k] = static_cast<double>(out[k]);
  long double ss = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    long double v = 0.0L, xp = 1.0L;
    for (int k = 0; k < m; ++k) {
      v += out[k] * xp;
      xp *= x[i];
    }
    const long double r = y[i] - v;
    ss += r * r;
  }
  fit.rms_residual = static_cast<double>(std::sqrt(ss / x.size()));
  return fit;
}

// Tridiagonal solve (Thomas algorithm, no pivoting). Suitable for the
// diagonally dominant Crank-Nicolson systems; breaks down otherwise.
template <typename T>
std::vector<T> thomas_solve(std::vector<T> diag, const std::vector<T>& lower,
                            const std::vector<T>& upper, std::vector<T> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n)
    throw InvalidSpec("thomas_solve: inconsistent band sizes");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300)
      throw SolverBreakdown("thomas_solve: vanishing pivot");
    const T w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-300)
    throw SolverBreakdown("thomas_solve: vanishing pivot");
  std::vector<T> sol(n);
  sol[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
  return sol;
}

}  // namespace nonspread
