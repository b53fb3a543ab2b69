#pragma once

// Dense generalized symmetric-definite eigensolver used as the independent
// oracle for the tridiagonal path (selfcheck and tests). Reduces (A, B) with
// B = L L^T to a standard symmetric problem and runs cyclic Jacobi. O(n^3)
// per sweep -- intended for small grids (~256 points).

#include <algorithm>
#include <cmath>
#include <vector>

#include "nonspread/eigen_tridiag.hpp"
#include "nonspread/errors.hpp"

namespace nonspread {

namespace detail {

inline std::vector<double> jacobi_eigenvalues(std::vector<double>& C, int n) {
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += C[p * n + q] * C[p * n + q];
    double diag = 0.0;
    for (int p = 0; p < n; ++p) diag += C[p * n + p] * C[p * n + p];
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = C[p * n + q];
        if (apq == 0.0) continue;
        const double app = C[p * n + p], aqq = C[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = std::copysign(
            1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta)), theta);
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (int k = 0; k < n; ++k) {
          const double ckp = C[k * n + p], ckq = C[k * n + q];
          C[k * n + p] = cs * ckp - sn * ckq;
          C[k * n + q] = sn * ckp + cs * ckq;
        }
        for (int k = 0; k < n; ++k) {
          const double cpk = C[p * n + k], cqk = C[q * n + k];
          C[p * n + k] = cs * cpk - sn * cqk;
          C[q * n + k] = sn * cpk + cs * cqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int p = 0; p < n; ++p) ev[p] = C[p * n + p];
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace detail

// All eigenvalues (ascending) of the same symmetric Numerov pencil the
// tridiagonal solver uses, via an independent dense route.
inline std::vector<double> dense_pencil_eigenvalues(const NumerovPencil& P) {
  const int m = P.interior();
  const double kin = P.c / (P.dx * P.dx);

  // Tridiagonal A_sym and B as dense matrices.
  std::vector<double> A(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> B(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    A[i * m + i] = 2.0 * kin + 10.0 / 12.0 * P.V[i + 1];
    B[i * m + i] = 10.0 / 12.0;
    if (i + 1 < m) {
      const double a = -kin + (P.V[i + 1] + P.V[i + 2]) / 24.0;
      A[i * m + i + 1] = A[(i + 1) * m + i] = a;
      B[i * m + i + 1] = B[(i + 1) * m + i] = 1.0 / 12.0;
    }
  }

  // B = L L^T (B is SPD: diagonally dominant with positive diagonal).
  std::vector<double> L(static_cast<std::size_t>(m) * m, 0.0);
  for (int j = 0; j < m; ++j) {
    double dsum = B[j * m + j];
    for (int k = 0; k < j; ++k) dsum -= L[j * m + k] * L[j * m + k];
    if (dsum <= 0.0) throw SolverBreakdown("dense oracle: B not positive definite");
    L[j * m + j] = std::sqrt(dsum);
    for (int i = j + 1; i < m; ++i) {
      double s = B[i * m + j];
      for (int k = 0; k < j; ++k) s -= L[i * m + k] * L[j * m + k];
      L[i * m + j] = s / L[j * m + j];
    }
  }

  // C = L^{-1} A L^{-T}: forward-solve L X = A, then L Y^T = X^T.
  std::vector<double>& X = A;
  for (int col = 0; col < m; ++col) {
    for (int i = 0; i < m; ++i) {
      double s = X[i * m + col];
      for (int k = 0; k < i; ++k) s -= L[i * m + k] * X[k * m + col];
      X[i * m + col] = s / L[i * m + i];
    }
  }
  for (int row = 0; row < m; ++row) {
    for (int j = 0; j < m; ++j) {
      double s = X[row * m + j];
      for (int k = 0; k < j; ++k) s -= L[j * m + k] * X[row * m + k];
      X[row * m + j] = s / L[j * m + j];
    }
  }
  return detail::jacobi_eigenvalues(X, m);
}

}  // namespace nonspread
