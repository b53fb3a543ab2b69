#pragma once

// Tridiagonal machinery for the Dirichlet eigenproblem -c f'' + V f = E f on
// the interior of a uniform grid.
//
// Discretization: Numerov generalized pencil. Eigenvalues come from the
// symmetrized pencil (A_sym, B) -- Sturm counts stay valid because B is
// positive definite, and the symmetrization error cancels at first order so
// eigenvalues are fourth-order accurate. Eigenvectors come from inverse
// iteration on the *plain* (asymmetric) Numerov matrix at the converged
// shift: the plain scheme's vectors are fourth-order pointwise, while the
// symmetrized pencil's vectors are only second-order.

#include <cmath>
#include <cstdint>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/errors.hpp"

namespace nonspread {

struct NumerovPencil {
  real_array V;   // potential samples on the full grid, boundaries included
  double dx = 0.0;
  double c = 0.0;  // hbar^2 / (2m)

  int interior() const { return static_cast<int>(V.size()) - 2; }
};

// Number of pencil eigenvalues strictly below lam, via the negative-pivot
// count of the LDL^T factorization of A_sym - lam*B (Sylvester's law).
inline int sturm_count_below(const NumerovPencil& P, double lam) {
  const int m = P.interior();
  const double kin = P.c / (P.dx * P.dx);
  int count = 0;
  double prev = 0.0;
  for (int i = 0; i < m; ++i) {
    double piv = 2.0 * kin + 10.0 / 12.0 * (P.V[i + 1] - lam);
    if (i > 0) {
      const double off =
          -kin + (P.V[i] + P.V[i + 1]) / 24.0 - lam / 12.0;
      piv -= off * off / prev;
    }
    if (piv == 0.0) piv = 1e-300;
    if (std::abs(piv) < 1e-150) piv = std::copysign(1e-150, piv);
    if (piv < 0.0) ++count;
    prev = piv;
  }
  return count;
}

// k-th eigenvalue (0-based) of the symmetric pencil by bisection on the
// Sturm count. [lo, hi] must bracket it.
inline double sturm_bisect(const NumerovPencil& P, int k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count_below(P, mid) <= k)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Tridiagonal LU with partial pivoting (one fill-in superdiagonal). The
// shifted inverse-iteration systems are near-singular by design, so the
// pivot-free Thomas solve is not safe here.
struct TriLU {
  std::vector<double> dl, d, du, du2;
  std::vector<bool> swapped;

  void factor(std::vector<double> lower, std::vector<double> diag,
              std::vector<double> upper) {
    const int m = static_cast<int>(diag.size());
    dl = std::move(lower);
    d = std::move(diag);
    du = std::move(upper);
    du2.assign(std::max(m - 2, 0), 0.0);
    swapped.assign(std::max(m - 1, 0), false);
    for (int i = 0; i < m - 1; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        const double fact = (d[i] != 0.0) ? dl[i] / d[i] : 0.0;
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double tmp = d[i + 1];
        d[i + 1] = du[i] - fact * tmp;
        du[i] = tmp;
        if (i < m - 2) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = true;
      }
    }
    for (int i = 0; i < m; ++i)
      if (std::abs(d[i]) < 1e-300) d[i] = 1e-300;  // keep the solve finite
  }

  std::vector<double> solve(std::vector<double> b) const {
    const int m = static_cast<int>(d.size());
    for (int i = 0; i < m - 1; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i];
      }
    }
    b[m - 1] /= d[m - 1];
    if (m > 1) b[m - 2] = (b[m - 2] - du[m - 2] * b[m - 1]) / d[m - 2];
    for (int i = m - 3; i >= 0; --i)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    return b;
  }
};

}  // namespace detail

// Interior eigenvector by inverse iteration on the plain Numerov pencil at
// shift lam. Deterministic start vector (fixed LCG) so runs are reproducible.
inline real_array inverse_iteration_vector(const NumerovPencil& P, double lam,
                                           int seed) {
  const int m = P.interior();
  const double kin = P.c / (P.dx * P.dx);
  std::vector<double> diag(m), lower(m - 1), upper(m - 1);
  for (int i = 0; i < m; ++i)
    diag[i] = 2.0 * kin + 10.0 / 12.0 * (P.V[i + 1] - lam);
  for (int i = 0; i + 1 < m; ++i) {
    lower[i] = -kin + (P.V[i + 1] - lam) / 12.0;
    upper[i] = -kin + (P.V[i + 2] - lam) / 12.0;
  }
  detail::TriLU lu;
  lu.factor(lower, diag, upper);

  std::uint64_t state = 0x9e3779b97f4a7c15ull + 0x100000001ull * (seed + 1);
  real_array v(m);
  for (int i = 0; i < m; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  for (int iter = 0; iter < 4; ++iter) {
    real_array rhs(m);  // B v
    for (int i = 0; i < m; ++i) {
      double s = 10.0 * v[i];
      if (i > 0) s += v[i - 1];
      if (i + 1 < m) s += v[i + 1];
      rhs[i] = s / 12.0;
    }
    v = lu.solve(std::move(rhs));
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm))
      throw ConvergenceFailure("inverse iteration produced a degenerate vector");
    for (double& x : v) x /= nrm;
  }
  return v;
}

// Sign changes among samples above a relative floor (nodes of the shape).
inline int count_nodes(const real_array& f, double rel_floor = 1e-8) {
  double peak = 0.0;
  for (double x : f) peak = std::max(peak, std::abs(x));
  const double floor = rel_floor * peak;
  int nodes = 0, last_sign = 0;
  for (double x : f) {
    if (std::abs(x) <= floor) continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

}  // namespace nonspread
