#pragma once

// Crank-Nicolson propagation on a fixed grid with Dirichlet boundaries.
// The scheme is unconditionally stable, unitary for real potentials, and
// second order in dt; the potential is evaluated at the half step.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"
#include "nonspread/specs.hpp"

namespace nonspread {

struct PropagationPlan {
  double dt = 0.0;
  double t_final = 0.0;
  int snapshot_stride = 1;
  PotentialSpec potential;
  UnitSystem units;
  bool waive_dirichlet = false;  // Airy runs keep data at the edge by design

  int n_steps() const {
    if (!(dt > 0.0)) throw InvalidSpec("PropagationPlan: dt must be positive");
    if (t_final < 0.0)
      throw InvalidSpec("PropagationPlan: t_final must be non-negative");
    const double steps = t_final / dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
      throw InvalidSpec("PropagationPlan: t_final must be an integer number of steps");
    return static_cast<int>(rounded);
  }
};

// One CN step: (1 + i dt H/2hbar) psi_new = (1 - i dt H/2hbar) psi_old,
// H evaluated at t + dt/2, endpoints held fixed (Dirichlet data).
inline WaveFunction cn_step(const WaveFunction& psi, const PotentialSpec& pot,
                            double t, double dt, const UnitSystem& units) {
  validate(units);
  const Grid& g = psi.grid;
  const int n = g.n_points;
  if (static_cast<int>(psi.values.size()) != n)
    throw GridMismatch("cn_step: wavefunction length does not match its grid");
  if (n < 4) throw InvalidSpec("cn_step: grid too small");

  const std::complex<double> lambda(0.0, 0.5 * dt / units.hbar);
  const double koff = -units.hbar * units.hbar / (2.0 * units.mass * g.dx * g.dx);
  const double kdiag = -2.0 * koff;
  const double t_mid = t + 0.5 * dt;

  const int m = n - 2;  // interior unknowns
  std::vector<std::complex<double>> diag(m), lower(m > 1 ? m - 1 : 0),
      upper(m > 1 ? m - 1 : 0), rhs(m);
  for (int i = 0; i < m; ++i) {
    const std::complex<double> v = potential_value(pot, g.x(i + 1), t_mid, units);
    const std::complex<double> h_diag = kdiag + v;
    diag[i] = 1.0 + lambda * h_diag;
    rhs[i] = (1.0 - lambda * h_diag) * psi.values[i + 1] -
             lambda * koff * (psi.values[i] + psi.values[i + 2]);
  }
  for (int i = 0; i + 1 < m; ++i) {
    lower[i] = lambda * koff;
    upper[i] = lambda * koff;
  }
  // Frozen endpoint values act as inhomogeneous Dirichlet data on both sides
  // of the scheme; the explicit-side contribution is already in rhs above.
  rhs.front() -= lambda * koff * psi.values.front();
  rhs.back() -= lambda * koff * psi.values.back();

  const std::vector<std::complex<double>> interior =
      thomas_solve(diag, lower, upper, rhs);

  WaveFunction out;
  out.grid = g;
  out.time = t + dt;
  out.values.resize(n);
  out.values.front() = psi.values.front();
  out.values.back() = psi.values.back();
  std::copy(interior.begin(), interior.end(), out.values.begin() + 1);
  return out;
}

struct Snapshot {
  WaveFunction wavefunction;
  int step_index = 0;
};

// Run the full plan, collecting snapshots every `snapshot_stride` steps.
// Step 0 and the final step are always included. The observer sees each
// snapshot as it is produced and must not mutate the evolving state.
template <typename Observer>
std::vector<Snapshot> propagate(const WaveFunction& psi0,
                                const PropagationPlan& plan,
                                Observer&& on_snapshot) {
  validate(plan.units);
  const int n_steps = plan.n_steps();
  if (plan.snapshot_stride < 1)
    throw InvalidSpec("propagate: snapshot_stride must be >= 1");

  if (!plan.waive_dirichlet) {
    double peak = 0.0;
    for (const auto& v : psi0.values) peak = std::max(peak, std::abs(v));
    const double edge =
        std::max(std::abs(psi0.values.front()), std::abs(psi0.values.back()));
    if (edge > 1e-8 * peak)
      throw DirichletViolation(
          "propagate: initial state is not negligible at the grid edge");
  }

  std::vector<Snapshot> snapshots;
  snapshots.reserve(static_cast<std::size_t>(n_steps / plan.snapshot_stride) + 2);
  auto record = [&](const WaveFunction& psi, int step) {
    snapshots.push_back(Snapshot{psi, step});
    on_snapshot(snapshots.back());
  };
  WaveFunction psi = psi0;
  record(psi, 0);
  for (int step = 0; step < n_steps; ++step) {
    psi = cn_step(psi, plan.potential, step * plan.dt, plan.dt, plan.units);
    psi.time = (step + 1) * plan.dt;  // avoid accumulated rounding in t
    if ((step + 1) % plan.snapshot_stride == 0 || step + 1 == n_steps)
      record(psi, step + 1);
  }
  return snapshots;
}

inline std::vector<Snapshot> propagate(const WaveFunction& psi0,
                                       const PropagationPlan& plan) {
  return propagate(psi0, plan, [](const Snapshot&) {});
}

}  // namespace nonspread
