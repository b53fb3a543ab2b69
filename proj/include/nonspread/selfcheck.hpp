#pragma once

// Built-in sanity suite behind `nonspread selfcheck`: quick, deterministic
// spot checks of the special functions, quadrature, eigensolver (against the
// dense oracle), and propagator, printing a pass/fail table.

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "nonspread/analysis.hpp"
#include "nonspread/constructor.hpp"
#include "nonspread/core.hpp"
#include "nonspread/dense_eig.hpp"
#include "nonspread/eigen_tridiag.hpp"
#include "nonspread/propagator.hpp"
#include "nonspread/specfun.hpp"

namespace nonspread {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double limit = 0.0;
};

namespace selfcheck_detail {

inline CheckResult check(const std::string& name, double measured, double limit) {
  return {name, std::isfinite(measured) && measured <= limit, measured, limit};
}

inline CheckResult airy_values() {
  struct Spot {
    double x, ai;
  };
  // Reference values computed from the defining series/asymptotics at high
  // precision, far beyond double round-off.
  const Spot spots[] = {
      {0.0, 0.35502805388781723926},   {1.0, 0.13529241631288141552},
      {5.0, 1.0834442813607441734e-4}, {-2.0, 0.22740742820168557599},
      {-10.0, 0.04024123848644319},
  };
  double err = 0.0;
  for (const Spot& s : spots)
    err = std::max(err, std::abs(airy_ai(s.x) - s.ai) /
                            std::max(1e-30, std::abs(s.ai)));
  return check("airy-spot-values", err, 1e-10);
}

inline CheckResult hermite_orthonormality() {
  const UnitSystem units;
  const Grid g = make_grid(-12.0, 12.0, 1536);
  double err = 0.0;
  for (int a = 0; a <= 4; ++a)
    for (int b = a; b <= 4; ++b) {
      real_array prod(g.n_points);
      for (int i = 0; i < g.n_points; ++i)
        prod[i] = sho_eigenfunction(a, g.x(i), units, 1.0) *
                  sho_eigenfunction(b, g.x(i), units, 1.0);
      const double overlap = trapezoid(prod, g.dx);
      err = std::max(err, std::abs(overlap - (a == b ? 1.0 : 0.0)));
    }
  return check("sho-orthonormality", err, 1e-10);
}

inline CheckResult simpson_quadrature() {
  const int n = 257;
  const double h = 2.0 / (n - 1);
  real_array f(n);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    f[i] = std::exp(-x) * std::cos(3.0 * x);
  }
  const real_array F = cumulative_simpson(f, h);
  // int exp(-x) cos(3x) dx = exp(-x) (3 sin(3x) - cos(3x)) / 10
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    const double exact =
        (std::exp(-x) * (3.0 * std::sin(3.0 * x) - std::cos(3.0 * x)) + 1.0) /
        10.0;
    err = std::max(err, std::abs(F[i] - exact));
  }
  return check("cumulative-simpson", err, 1e-8);
}

inline CheckResult eigen_vs_dense(const std::string& name, const real_array& V,
                                  double dx) {
  NumerovPencil pencil{V, dx, 0.5};
  const real_array dense = dense_pencil_eigenvalues(pencil);
  double err = 0.0;
  double lo = dense.front() - 1.0, hi = dense[5] + 1.0;
  for (int k = 0; k < 6; ++k) {
    const double lam = sturm_bisect(pencil, k, lo, hi);
    err = std::max(err, std::abs(lam - dense[k]) / std::max(1.0, std::abs(dense[k])));
  }
  return check(name, err, 1e-10);
}

inline CheckResult eigen_sho_dense() {
  const Grid g = make_grid(-12.0, 12.0, 256);
  real_array V(g.n_points);
  for (int i = 0; i < g.n_points; ++i) V[i] = 0.5 * g.x(i) * g.x(i);
  return eigen_vs_dense("eigen-dense-sho", V, g.dx);
}

inline CheckResult eigen_quartic_dense() {
  const Grid g = make_grid(-8.0, 8.0, 256);
  real_array V(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    V[i] = x * x * x * x;
  }
  return eigen_vs_dense("eigen-dense-quartic", V, g.dx);
}

inline CheckResult cn_unitarity() {
  const UnitSystem units;
  const Grid g = make_grid(-10.0, 10.0, 512);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    psi.values[i] = std::exp(-0.5 * (x - 1.0) * (x - 1.0)) *
                    std::complex<double>(std::cos(2.0 * x), std::sin(2.0 * x));
  }
  PotentialSpec pot;
  pot.real = Harmonic{1.0, 0.0};
  const double n0 = probability(psi);
  for (int s = 0; s < 200; ++s)
    psi = cn_step(psi, pot, s * 1e-3, 1e-3, units);
  const double drift = std::abs(probability(psi) - n0) / n0;
  return check("cn-unitarity", drift, 1e-13);
}

inline WaveFunction stationary_ground_state() {
  const UnitSystem units;
  const Grid g = make_grid(-8.0, 8.0, 8192);  // fine enough that the grid's
  WaveFunction psi;                           // energy offset is < 1e-9 rad/step
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    psi.values[i] = sho_eigenfunction(0, g.x(i), units, 1.0);
  return psi;
}

inline CheckResult cn_stationary_phase() {
  const UnitSystem units;
  const WaveFunction psi = stationary_ground_state();
  PotentialSpec pot;
  pot.real = Harmonic{1.0, 0.0};
  const double dt = 1e-3;
  const WaveFunction next = cn_step(psi, pot, 0.0, dt, units);
  // A stationary eigenstate only rotates: psi' = e^{-i E0 dt} psi, E0 = 0.5.
  const int mid = psi.grid.n_points / 2;
  const double phase = std::arg(next.values[mid] / psi.values[mid]);
  return check("cn-stationary-phase", std::abs(phase + 0.5 * dt), 1e-9);
}

inline CheckResult cn_stationary_density() {
  const UnitSystem units;
  const WaveFunction psi = stationary_ground_state();
  PotentialSpec pot;
  pot.real = Harmonic{1.0, 0.0};
  const WaveFunction next = cn_step(psi, pot, 0.0, 1e-3, units);
  double err = 0.0;
  for (int i = 0; i < psi.grid.n_points; ++i)
    err = std::max(err,
                   std::abs(std::norm(next.values[i]) - std::norm(psi.values[i])));
  return check("cn-stationary-density", err, 1e-10);
}

inline CheckResult plane_wave_current() {
  const UnitSystem units;
  const Grid g = make_grid(-6.0, 6.0, 2048);
  const double k = 2.0;
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    const double env = std::exp(-x * x / 18.0);
    psi.values[i] = env * std::complex<double>(std::cos(k * x), std::sin(k * x));
  }
  const real_array j = probability_current(psi, units);
  double err = 0.0;
  for (int i = g.n_points / 4; i < 3 * g.n_points / 4; ++i) {
    const double rho = std::norm(psi.values[i]);
    err = std::max(err, std::abs(j[i] - k * rho));
  }
  return check("plane-wave-current", err, 1e-4);
}

}  // namespace selfcheck_detail

inline std::vector<CheckResult> run_selfcheck_suite() {
  using namespace selfcheck_detail;
  return {airy_values(),          hermite_orthonormality(),
          simpson_quadrature(),   eigen_sho_dense(),
          eigen_quartic_dense(),  cn_unitarity(),
          cn_stationary_phase(),  cn_stationary_density(),
          plane_wave_current()};
}

inline int run_selfcheck(std::FILE* out = stdout) {
  const std::vector<CheckResult> results = run_selfcheck_suite();
  int passed = 0;
  std::fprintf(out, "%-24s %-6s %-14s %s\n", "check", "status", "measured",
               "limit");
  for (const CheckResult& r : results) {
    std::fprintf(out, "%-24s %-6s %-14.3e %.0e\n", r.name.c_str(),
                 r.passed ? "PASS" : "FAIL", r.measured, r.limit);
    if (r.passed) ++passed;
  }
  std::fprintf(out, "selfcheck: %d/%zu passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? 0 : 4;
}

}  // namespace nonspread
