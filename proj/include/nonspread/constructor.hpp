#pragma once

// Packet construction: co-moving effective potential, consistency condition,
// shape eigenproblem, motion constraints, phase quadratures, assembly, and
// the closed-form reference packets.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/core.hpp"
#include "nonspread/eigen_tridiag.hpp"
#include "nonspread/errors.hpp"
#include "nonspread/specfun.hpp"
#include "nonspread/specs.hpp"

namespace nonspread {

inline constexpr int kFitDegree = 8;
inline constexpr double kConsistencyTol = 1e-8;

struct EffectivePotential {
  Grid q_grid;
  real_array samples;
  real_array poly_coeffs;  // c0..cK, monomials in q
  double fit_residual = 0.0;
};

struct ConsistencyReport {
  int powers_checked = 0;  // coefficients 0..powers_checked examined
  real_array max_time_variation;
  bool consistent = false;
  std::vector<int> offending_powers;
  double tolerance_used = 0.0;
  double max_samplewise_variation = 0.0;  // catches non-polynomial drift
};

struct ShapeSolution {
  Grid q_grid;
  real_array f;
  double E_eff = 0.0;
  int node_count = 0;
  bool normalizable = true;
};

struct PhaseTrack {
  real_array times;  // uniform, starting at 0
  real_array d, d_dot, d_ddot;
  real_array phi1, phi0;
  double E_eff_used = 0.0;
};

namespace detail {

inline void require_real(const PotentialSpec& pot, const char* who) {
  if (!pot.is_real())
    throw ComplexPotential(std::string(who) +
                           ": construction requires a real potential");
}

inline void require_uniform_from_zero(const real_array& times, const char* who) {
  if (times.size() < 2)
    throw InvalidSpec(std::string(who) + ": need at least 2 time samples");
  if (std::abs(times.front()) > 1e-12)
    throw InvalidSpec(std::string(who) + ": time lattice must start at 0");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw InvalidSpec(std::string(who) + ": lattice not increasing");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[0] - i * dt) > 1e-9 * std::max(1.0, times.back()))
      throw InvalidSpec(std::string(who) + ": time lattice must be uniform");
}

inline real_array effective_samples(const RealPotential& pot,
                                    const MotionSpec& motion, const Grid& q_grid,
                                    double t, const UnitSystem& units) {
  const MotionState s = motion_eval(motion, t);
  const double v_center = real_potential_value(pot, s.d, t, units);
  real_array out(q_grid.n_points);
  for (int i = 0; i < q_grid.n_points; ++i) {
    const double q = q_grid.x(i);
    out[i] = real_potential_value(pot, q + s.d, t, units) - v_center +
             units.mass * s.d_ddot * q;
  }
  return out;
}

}  // namespace detail

// V_eff(q, t) = V(q + d(t), t) - V(d(t), t) + m d_ddot(t) q, sampled on the
// co-moving grid, with a degree-8 polynomial fit attached.
inline EffectivePotential effective_potential(const PotentialSpec& pot,
                                              const MotionSpec& motion,
                                              const Grid& q_grid, double t,
                                              const UnitSystem& units) {
  detail::require_real(pot, "effective_potential");
  validate(units);
  EffectivePotential veff;
  veff.q_grid = q_grid;
  veff.samples = detail::effective_samples(pot.real, motion, q_grid, t, units);
  real_array q(q_grid.n_points);
  for (int i = 0; i < q_grid.n_points; ++i) q[i] = q_grid.x(i);
  PolyFit fit = fit_polynomial(q, veff.samples, kFitDegree);
  veff.poly_coeffs = std::move(fit.coeffs);
  veff.fit_residual = fit.rms_residual;
  return veff;
}

// Nonspreading requires every q-power coefficient of V_eff to be constant in
// time. Fit coefficients carry the per-power verdicts; a sample-wise maximum
// deviation backstops shapes the fit cannot represent.
inline ConsistencyReport consistency_check(const PotentialSpec& pot,
                                           const MotionSpec& motion,
                                           const Grid& q_grid,
                                           const real_array& times,
                                           int max_degree = kFitDegree,
                                           double tol = kConsistencyTol) {
  detail::require_real(pot, "consistency_check");
  if (times.size() < 8)
    throw InvalidSpec("consistency_check: need at least 8 time samples");

  real_array q(q_grid.n_points);
  for (int i = 0; i < q_grid.n_points; ++i) q[i] = q_grid.x(i);

  UnitSystem units;  // consistency is checked in the caller's units
  ConsistencyReport rep;
  rep.powers_checked = max_degree;
  rep.tolerance_used = tol;
  rep.max_time_variation.assign(max_degree + 1, 0.0);

  real_array base_coeffs, base_samples;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const real_array samples =
        detail::effective_samples(pot.real, motion, q_grid, times[it], units);
    const PolyFit fit = fit_polynomial(q, samples, max_degree);
    if (it == 0) {
      base_coeffs = fit.coeffs;
      base_samples = samples;
      continue;
    }
    for (int p = 0; p <= max_degree; ++p)
      rep.max_time_variation[p] = std::max(
          rep.max_time_variation[p], std::abs(fit.coeffs[p] - base_coeffs[p]));
    for (int i = 0; i < q_grid.n_points; ++i)
      rep.max_samplewise_variation = std::max(
          rep.max_samplewise_variation, std::abs(samples[i] - base_samples[i]));
  }
  for (int p = 1; p <= max_degree; ++p)
    if (rep.max_time_variation[p] > tol) rep.offending_powers.push_back(p);
  rep.consistent =
      rep.offending_powers.empty() && rep.max_samplewise_variation <= tol;
  return rep;
}

namespace detail {

inline bool detect_linear(const EffectivePotential& veff, double* c1_out) {
  const double L =
      std::max(std::abs(veff.q_grid.x_min), std::abs(veff.q_grid.x_max));
  const double c1 = veff.poly_coeffs.size() > 1 ? veff.poly_coeffs[1] : 0.0;
  if (c1 == 0.0) return false;
  double Ln = L;
  for (std::size_t n = 2; n < veff.poly_coeffs.size(); ++n) {
    Ln *= L;  // L^n
    if (std::abs(veff.poly_coeffs[n]) * Ln > 1e-10 * std::abs(c1) * L)
      return false;
  }
  *c1_out = c1;
  return true;
}

}  // namespace detail

// Lowest k eigenpairs of the shape equation -(hbar^2/2m) f'' + V_eff f =
// E_eff f with Dirichlet boundaries. A linear V_eff short-circuits to the
// sampled Airy solution (the linear potential is unbounded below, so the
// Dirichlet eigenproblem would be meaningless there).
inline std::vector<ShapeSolution> solve_shape(const EffectivePotential& veff,
                                              int k, const UnitSystem& units) {
  validate(units);
  if (k < 1) throw InvalidSpec("solve_shape: k must be >= 1");
  const Grid& g = veff.q_grid;

  double c1 = 0.0;
  if (detail::detect_linear(veff, &c1)) {
    ShapeSolution sol;
    sol.q_grid = g;
    sol.normalizable = false;
    sol.E_eff = 0.0;
    const double scale =
        std::cbrt(2.0 * units.mass * c1 / (units.hbar * units.hbar));
    sol.f.resize(g.n_points);
    for (int i = 0; i < g.n_points; ++i) sol.f[i] = airy_ai(scale * g.x(i));
    sol.node_count = count_nodes(sol.f);
    return {std::move(sol)};
  }

  const int n = g.n_points;
  const auto& V = veff.samples;
  int i_min = 0;
  for (int i = 1; i < n; ++i)
    if (V[i] < V[i_min]) i_min = i;
  const bool confining =
      i_min >= 2 && i_min <= n - 3 && V.front() > V[i_min] && V.back() > V[i_min];
  if (!confining)
    throw NotConfining("solve_shape: V_eff neither confining nor linear");

  NumerovPencil pencil{V, g.dx, units.hbar * units.hbar / (2.0 * units.mass)};
  const double v_min = V[i_min];
  const double v_max = *std::max_element(V.begin(), V.end());
  double lo = v_min - 1.0;
  double hi = v_max + 1.0;
  for (int grow = 0; sturm_count_below(pencil, hi) < k; ++grow) {
    if (grow > 60)
      throw ConvergenceFailure("solve_shape: cannot bracket requested eigenvalues");
    hi += (hi - lo);
  }

  std::vector<ShapeSolution> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double lam = sturm_bisect(pencil, j, lo, hi);
    real_array interior = inverse_iteration_vector(pencil, lam, j);
    ShapeSolution sol;
    sol.q_grid = g;
    sol.E_eff = lam;
    sol.normalizable = true;
    sol.f.assign(n, 0.0);
    std::copy(interior.begin(), interior.end(), sol.f.begin() + 1);

    int i_peak = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(sol.f[i]) > std::abs(sol.f[i_peak])) i_peak = i;
    if (sol.f[i_peak] < 0.0)
      for (double& x : sol.f) x = -x;
    real_array sq(n);
    for (int i = 0; i < n; ++i) sq[i] = sol.f[i] * sol.f[i];
    const double nrm = std::sqrt(trapezoid(sq, g.dx));
    if (!(nrm > 0.0))
      throw ConvergenceFailure("solve_shape: zero-norm eigenvector");
    for (double& x : sol.f) x /= nrm;
    sol.node_count = count_nodes(sol.f);
    out.push_back(std::move(sol));
  }
  return out;
}

// d(t) solving the center equation of motion (the classical trajectory plus
// the B^3/2m self-acceleration) for the supported potentials. Closed forms
// where they exist; otherwise fixed-step RK4 on the lattice.
inline MotionSpec motion_from_constraint(const PotentialSpec& pot, double B,
                                         double v0, const real_array& times,
                                         const UnitSystem& units) {
  detail::require_real(pot, "motion_from_constraint");
  validate(units);
  const double m = units.mass;
  const double accel0 = B * B * B / (2.0 * m * m);

  if (std::holds_alternative<FreeSpace>(pot.real)) {
    if (v0 == 0.0) return make_motion_constant_accel(B, m);
    return make_motion_polynomial({0.0, v0, 0.5 * accel0});
  }
  if (const auto* h = std::get_if<Harmonic>(&pot.real)) {
    if (h->omega_ramp != 0.0)
      throw UnsupportedPotential(
          "motion_from_constraint: time-dependent frequency admits no "
          "nonspreading motion");
    return MotionSinusoid{v0 / h->omega0, h->omega0, 0.0};
  }
  if (const auto* uf = std::get_if<UniformForce>(&pot.real)) {
    if (const auto* fc = std::get_if<ForceConstant>(&uf->force))
      return make_motion_polynomial(
          {0.0, v0, 0.5 * (fc->F0 / m + accel0)});
    // m d_ddot = F(t) + B^3/(2m): integrate on the given lattice.
    detail::require_uniform_from_zero(times, "motion_from_constraint");
    const double h = times[1] - times[0];
    const std::size_t n = times.size();
    real_array d(n), v(n), a(n);
    d[0] = 0.0;
    v[0] = v0;
    for (std::size_t i = 0; i < n; ++i)
      a[i] = force_value(uf->force, times[i]) / m + accel0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double am = force_value(uf->force, times[i] + 0.5 * h) / m + accel0;
      // RK4 for (d' = v, v' = a(t)) collapses to these Simpson-type updates.
      d[i + 1] = d[i] + h * v[i] + h * h / 6.0 * (a[i] + 2.0 * am);
      v[i + 1] = v[i] + h / 6.0 * (a[i] + 4.0 * am + a[i + 1]);
    }
    return make_motion_numeric(0.0, h, std::move(d), std::move(v), std::move(a));
  }
  throw UnsupportedPotential(
      "motion_from_constraint: only free space, uniform force, and constant-"
      "frequency harmonic potentials constrain d(t)");
}

// phi1 = m d_dot / hbar exactly; phi0 by fourth-order cumulative Simpson of
// hbar phi0' = -E_eff - V(d(t), t) - m d_dot^2 / 2 - m d d_ddot, phi0(0) = 0.
inline PhaseTrack build_phase(const PotentialSpec& pot, const MotionSpec& motion,
                              double E_eff, const real_array& times,
                              const UnitSystem& units) {
  detail::require_real(pot, "build_phase");
  validate(units);
  detail::require_uniform_from_zero(times, "build_phase");
  const double m = units.mass, hbar = units.hbar;
  const std::size_t n = times.size();

  PhaseTrack track;
  track.times = times;
  track.E_eff_used = E_eff;
  track.d.resize(n);
  track.d_dot.resize(n);
  track.d_ddot.resize(n);
  track.phi1.resize(n);
  real_array integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MotionState s = motion_eval(motion, times[i]);
    track.d[i] = s.d;
    track.d_dot[i] = s.d_dot;
    track.d_ddot[i] = s.d_ddot;
    track.phi1[i] = m * s.d_dot / hbar;
    integrand[i] =
        (-E_eff - real_potential_value(pot.real, s.d, times[i], units) -
         0.5 * m * s.d_dot * s.d_dot - m * s.d * s.d_ddot) /
        hbar;
  }
  track.phi0 = cumulative_simpson(integrand, times[1] - times[0]);
  return track;
}

// f(x - d) resampled onto the lab grid by the shared cubic rule. Outside the
// shape's own grid a normalizable shape is zero; a non-normalizable one has
// no trustworthy extension, which is a coverage failure.
inline real_array resample_shape(const ShapeSolution& shape, const Grid& grid,
                                 double d) {
  real_array out(grid.n_points);
  const double q_lo = shape.q_grid.x_min, q_hi = shape.q_grid.x_max;
  for (int i = 0; i < grid.n_points; ++i) {
    const double q = grid.x(i) - d;
    if (q < q_lo - 1e-12 || q > q_hi + 1e-12) {
      if (!shape.normalizable)
        throw SupportEscape("resample_shape: shape grid does not cover x - d");
      out[i] = 0.0;
    } else {
      out[i] = cubic_interp(q_lo, shape.q_grid.dx, shape.f, q);
    }
  }
  return out;
}

namespace detail {

struct PhaseAt {
  double d, phi1, phi0;
};

inline PhaseAt phase_at(const MotionSpec& motion, const PhaseTrack& track,
                        double t) {
  const real_array& ts = track.times;
  if (t < ts.front() - 1e-9 || t > ts.back() + 1e-9)
    throw TimeOutOfRange("assemble_packet: t outside the phase lattice");
  const double dt = ts[1] - ts[0];
  const double pos = (t - ts.front()) / dt;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9 &&
      nearest >= 0.0 && nearest < static_cast<double>(ts.size())) {
    const std::size_t i = static_cast<std::size_t>(nearest);
    return {track.d[i], track.phi1[i], track.phi0[i]};
  }
  const MotionState s = motion_eval(motion, t);
  return {s.d, cubic_interp(ts.front(), dt, track.phi1, t),
          cubic_interp(ts.front(), dt, track.phi0, t)};
}

}  // namespace detail

// Psi(x, t) = f(x - d(t)) exp(i [phi1(t) x + phi0(t)]).
inline WaveFunction assemble_packet(const ShapeSolution& shape,
                                    const MotionSpec& motion,
                                    const PhaseTrack& phase, const Grid& grid,
                                    double t) {
  const detail::PhaseAt ph = detail::phase_at(motion, phase, t);
  const real_array f = resample_shape(shape, grid, ph.d);

  WaveFunction psi;
  psi.grid = grid;
  psi.time = t;
  psi.values.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double theta = ph.phi1 * grid.x(i) + ph.phi0;
    psi.values[i] = f[i] * std::complex<double>(std::cos(theta), std::sin(theta));
  }

  if (shape.normalizable) {
    double peak = 0.0;
    for (int i = 0; i < grid.n_points; ++i)
      peak = std::max(peak, f[i] * f[i]);
    const double edge =
        std::max(f.front() * f.front(), f.back() * f.back());
    if (peak > 0.0 && edge > 1e-6 * peak)
      throw SupportEscape("assemble_packet: shape support reaches the grid edge");
  }
  return psi;
}

// Psi = Ai[(B/hbar^{2/3}) (x - B^3 t^2 / 4m^2)]
//       * exp{ i (B^3 t / 2 m hbar) (x - B^3 t^2 / 6 m^2) }.
inline WaveFunction airy_reference(double B, const Grid& grid, double t,
                                   const UnitSystem& units) {
  validate(units);
  const double m = units.mass, hbar = units.hbar;
  const double B3 = B * B * B;
  const double scale = B / std::pow(hbar, 2.0 / 3.0);
  const double drift = B3 * t * t / (4.0 * m * m);
  const double k = B3 * t / (2.0 * m * hbar);
  const double chirp = B3 * t * t / (6.0 * m * m);
  WaveFunction psi;
  psi.grid = grid;
  psi.time = t;
  psi.values.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    const double amp = airy_ai(scale * (x - drift));
    const double theta = k * (x - chirp);
    psi.values[i] =
        amp * std::complex<double>(std::cos(theta), std::sin(theta));
  }
  return psi;
}

// Uniform-force kinematics and phase via nested cumulative-Simpson integrals:
//   d = B^3 t^2/4m^2 + (1/m) int int F
//   hbar phi0 = -B^6 t^3/12m^3 - (1/2m) int G^2
//               - (B^3/2m^2) (int tau G + int int G),   G = int F.
inline PhaseTrack uniform_force_track(const ForceSpec& F, double B,
                                      const real_array& times,
                                      const UnitSystem& units) {
  validate(units);
  detail::require_uniform_from_zero(times, "uniform_force_track");
  const double m = units.mass, hbar = units.hbar;
  const double h = times[1] - times[0];
  const std::size_t n = times.size();
  const double B3 = B * B * B;

  real_array Fv(n);
  for (std::size_t i = 0; i < n; ++i) Fv[i] = force_value(F, times[i]);
  const real_array G = cumulative_simpson(Fv, h);
  const real_array GG = cumulative_simpson(G, h);  // int int F

  // The nested double integral must agree with the single-integral identity
  // int_0^t (t - tau) F(tau) dtau; a gap means the quadrature went wrong.
  {
    real_array tF(n);
    for (std::size_t i = 0; i < n; ++i) tF[i] = times[i] * Fv[i];
    const real_array iTF = cumulative_simpson(tF, h);
    for (std::size_t i = 0; i < n; ++i) {
      const double identity = times[i] * G[i] - iTF[i];
      if (std::abs(GG[i] - identity) > 1e-6 * std::max(1.0, std::abs(GG[i])))
        throw ConvergenceFailure(
            "uniform_force_track: nested integral fails the identity check");
    }
  }

  PhaseTrack track;
  track.times = times;
  track.E_eff_used = 0.0;
  track.d.resize(n);
  track.d_dot.resize(n);
  track.d_ddot.resize(n);
  track.phi1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    track.d[i] = B3 * t * t / (4.0 * m * m) + GG[i] / m;
    track.d_dot[i] = B3 * t / (2.0 * m * m) + G[i] / m;
    track.d_ddot[i] = B3 / (2.0 * m * m) + Fv[i] / m;
    track.phi1[i] = m * track.d_dot[i] / hbar;
  }

  real_array G2(n), tG(n);
  for (std::size_t i = 0; i < n; ++i) {
    G2[i] = G[i] * G[i];
    tG[i] = times[i] * G[i];
  }
  const real_array iG2 = cumulative_simpson(G2, h);
  const real_array itG = cumulative_simpson(tG, h);
  const real_array iGG = cumulative_simpson(GG, h);
  track.phi0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    track.phi0[i] = (-B3 * B3 * t * t * t / (12.0 * m * m * m) -
                     iG2[i] / (2.0 * m) -
                     B3 / (2.0 * m * m) * (itG[i] + iGG[i])) /
                    hbar;
  }
  return track;
}

// Largest discrepancy between the nested-integral form of d(t) and the
// single-integral identity int_0^t (t - tau) F(tau) dtau.
inline double uniform_force_identity_gap(const ForceSpec& F, double B,
                                         const real_array& times,
                                         const UnitSystem& units) {
  validate(units);
  detail::require_uniform_from_zero(times, "uniform_force_identity_gap");
  const double m = units.mass;
  const double h = times[1] - times[0];
  const std::size_t n = times.size();
  real_array Fv(n), tF(n);
  for (std::size_t i = 0; i < n; ++i) {
    Fv[i] = force_value(F, times[i]);
    tF[i] = times[i] * Fv[i];
  }
  const real_array G = cumulative_simpson(Fv, h);
  const real_array GG = cumulative_simpson(G, h);
  const real_array iTF = cumulative_simpson(tF, h);
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    const double base = B * B * B * t * t / (4.0 * m * m);
    const double nested = base + GG[i] / m;
    const double identity = base + (t * G[i] - iTF[i]) / m;
    gap = std::max(gap, std::abs(nested - identity));
  }
  return gap;
}

// Displaced-eigenstate coherent packet: d = x0 sin(wt), phi1 = (m w x0/hbar)
// cos(wt), phi0 = -(m w x0^2 / 4 hbar) sin(2wt) - E_n t / hbar.
inline WaveFunction sho_reference(int n, double x0, double omega,
                                  const Grid& grid, double t,
                                  const UnitSystem& units) {
  validate(units);
  const double m = units.mass, hbar = units.hbar;
  const double d = x0 * std::sin(omega * t);
  const double phi1 = m * omega * x0 * std::cos(omega * t) / hbar;
  const double En = hbar * omega * (n + 0.5);
  const double phi0 =
      -m * omega * x0 * x0 / (4.0 * hbar) * std::sin(2.0 * omega * t) -
      En * t / hbar;
  WaveFunction psi;
  psi.grid = grid;
  psi.time = t;
  psi.values.resize(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    const double theta = phi1 * x + phi0;
    psi.values[i] = sho_eigenfunction(n, x - d, units, omega) *
                    std::complex<double>(std::cos(theta), std::sin(theta));
  }
  return psi;
}

}  // namespace nonspread
