#pragma once

// Verification metrics: shape invariance in the co-moving frame, probability
// current vs the drift identity j = d_dot * density, linearity of the phase,
// energy bookkeeping, and a discrete Schrodinger residual over snapshots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "nonspread/calculus.hpp"
#include "nonspread/constructor.hpp"
#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"
#include "nonspread/propagator.hpp"
#include "nonspread/specs.hpp"

namespace nonspread {

struct AnalysisWindow {
  double fraction = 0.6;       // central portion of the grid scored
  double density_floor = 1e-6; // relative to peak, for phase fits
};

struct InvarianceMetrics {
  real_array times;
  real_array shape_err_L2;
  real_array shape_err_Linf;
  real_array centroid_err;  // <x> - d for normalizable shapes, x_peak - d else
  real_array norm;
  real_array flux_residual;
  real_array phase_residual;
};

struct EnergyReport {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double E_n_reference = std::numeric_limits<double>::quiet_NaN();
  double E_cl_reference = std::numeric_limits<double>::quiet_NaN();
};

struct PhaseLinearity {
  double slope = 0.0;      // estimates phi1
  double intercept = 0.0;  // estimates phi0 modulo pi
  double rms_residual = 0.0;
};

namespace detail {

struct WindowIndices {
  int lo = 0, hi = 0;  // inclusive
};

inline WindowIndices window_indices(const Grid& g, const AnalysisWindow& w) {
  if (!(w.fraction > 0.0) || w.fraction > 1.0)
    throw InvalidSpec("AnalysisWindow: fraction must lie in (0, 1]");
  const int n = g.n_points;
  const int lo = static_cast<int>(std::round((n - 1) * (1.0 - w.fraction) / 2.0));
  return {lo, n - 1 - lo};
}

// Quadratic refinement of a discrete maximum.
inline double refine_peak(const Grid& g, const real_array& rho, int i) {
  if (i <= 0 || i + 1 >= static_cast<int>(rho.size())) return g.x(i);
  const double denom = rho[i - 1] - 2.0 * rho[i] + rho[i + 1];
  if (denom >= 0.0) return g.x(i);
  return g.x(i) + 0.5 * g.dx * (rho[i - 1] - rho[i + 1]) / denom;
}

}  // namespace detail

// j(x) = (hbar/m) Im(psi* dpsi/dx); central differences inside, one-sided
// second-order stencils at the ends. Identically zero for real psi.
inline real_array probability_current(const WaveFunction& psi,
                                      const UnitSystem& units) {
  validate(units);
  const int n = psi.grid.n_points;
  if (static_cast<int>(psi.values.size()) != n)
    throw GridMismatch("probability_current: wavefunction length mismatch");
  if (n < 4) throw InvalidSpec("probability_current: grid too small");
  const double dx = psi.grid.dx;
  const auto& v = psi.values;
  real_array j(n);
  const double pref = units.hbar / units.mass;
  auto im_conj = [&](int i, std::complex<double> deriv) {
    return pref * std::imag(std::conj(v[i]) * deriv);
  };
  j[0] = im_conj(0, (-1.5 * v[0] + 2.0 * v[1] - 0.5 * v[2]) / dx);
  for (int i = 1; i + 1 < n; ++i)
    j[i] = im_conj(i, (v[i + 1] - v[i - 1]) / (2.0 * dx));
  j[n - 1] = im_conj(n - 1, (1.5 * v[n - 1] - 2.0 * v[n - 2] + 0.5 * v[n - 3]) / dx);
  return j;
}

// Least-squares line through the unwrapped phase over the connected
// high-density region around the peak, weighted by density. The phase is
// taken as arg(psi^2)/2 so sign changes of a real envelope do not inject
// pi jumps at nodes; consequently the intercept is determined modulo pi.
inline PhaseLinearity phase_linearity(const WaveFunction& psi,
                                      const AnalysisWindow& window) {
  const Grid& g = psi.grid;
  const detail::WindowIndices w = detail::window_indices(g, window);
  const int n = g.n_points;
  if (static_cast<int>(psi.values.size()) != n)
    throw GridMismatch("phase_linearity: wavefunction length mismatch");

  real_array rho(n);
  for (int i = 0; i < n; ++i) rho[i] = std::norm(psi.values[i]);
  int i_peak = w.lo;
  for (int i = w.lo; i <= w.hi; ++i)
    if (rho[i] > rho[i_peak]) i_peak = i;
  const double floor_abs = window.density_floor * rho[i_peak];

  int lo = i_peak, hi = i_peak;
  while (lo > w.lo && rho[lo - 1] >= floor_abs) --lo;
  while (hi < w.hi && rho[hi + 1] >= floor_abs) ++hi;
  const int count = hi - lo + 1;
  if (count < 8)
    throw InsufficientSupport("phase_linearity: fewer than 8 usable points");

  real_array theta(count);
  for (int i = 0; i < count; ++i) {
    const std::complex<double> z = psi.values[lo + i];
    theta[i] = 0.5 * std::arg(z * z);
  }
  // Unwrap outward from the peak in pi steps (phase known modulo pi).
  constexpr double pi = std::numbers::pi;
  const int ip = i_peak - lo;
  for (int i = ip + 1; i < count; ++i)
    theta[i] += pi * std::round((theta[i - 1] - theta[i]) / pi);
  for (int i = ip - 1; i >= 0; --i)
    theta[i] += pi * std::round((theta[i + 1] - theta[i]) / pi);

  // Density-weighted fit theta = a x + b, centered for conditioning.
  long double sw = 0, swx = 0;
  for (int i = 0; i < count; ++i) {
    sw += rho[lo + i];
    swx += static_cast<long double>(rho[lo + i]) * g.x(lo + i);
  }
  const long double xbar = swx / sw;
  long double sxx = 0, sxy = 0, sy = 0;
  for (int i = 0; i < count; ++i) {
    const long double u = g.x(lo + i) - xbar;
    sxx += rho[lo + i] * u * u;
    sxy += rho[lo + i] * u * theta[i];
    sy += rho[lo + i] * static_cast<long double>(theta[i]);
  }
  PhaseLinearity fit;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = static_cast<double>(sy / sw - (sxy / sxx) * xbar);
  long double ss = 0;
  for (int i = 0; i < count; ++i) {
    const long double r = theta[i] - (fit.slope * g.x(lo + i) + fit.intercept);
    ss += rho[lo + i] * r * r;
  }
  fit.rms_residual = static_cast<double>(std::sqrt(ss / sw));
  return fit;
}

// Per-snapshot invariance metrics against the constructed shape carried at
// d(t). Uses the same cubic resampling rule as assembly, so analytically
// assembled snapshots score exactly zero up to round-off.
inline InvarianceMetrics invariance_metrics(const std::vector<Snapshot>& snapshots,
                                            const ShapeSolution& shape,
                                            const MotionSpec& motion,
                                            const AnalysisWindow& window,
                                            const UnitSystem& units) {
  if (snapshots.empty())
    throw InvalidSpec("invariance_metrics: no snapshots");
  const Grid& g = snapshots.front().wavefunction.grid;
  const detail::WindowIndices w = detail::window_indices(g, window);
  const int n = g.n_points;

  InvarianceMetrics out;
  const std::size_t ns = snapshots.size();
  out.times.resize(ns);
  out.shape_err_L2.resize(ns);
  out.shape_err_Linf.resize(ns);
  out.centroid_err.resize(ns);
  out.norm.resize(ns);
  out.flux_residual.resize(ns);
  out.phase_residual.resize(ns);

  for (std::size_t s = 0; s < ns; ++s) {
    const WaveFunction& psi = snapshots[s].wavefunction;
    if (!(psi.grid == g))
      throw GridMismatch("invariance_metrics: snapshots on different grids");
    const double t = psi.time;
    out.times[s] = t;
    const MotionState ms = motion_eval(motion, t);

    real_array rho(n);
    for (int i = 0; i < n; ++i) rho[i] = std::norm(psi.values[i]);
    double peak = 0.0;
    for (int i = 0; i < n; ++i) peak = std::max(peak, rho[i]);
    if (shape.normalizable && peak > 0.0 &&
        std::max(rho[w.lo], rho[w.hi]) > 1e-4 * peak)
      throw SupportEscape(
          "invariance_metrics: density at the window edge is not negligible");

    const real_array f_ref = resample_shape(shape, g, ms.d);
    real_array rho_ref(n);
    for (int i = 0; i < n; ++i) rho_ref[i] = f_ref[i] * f_ref[i];

    double ref_peak = 0.0, linf = 0.0;
    long double num2 = 0.0, den2 = 0.0;
    for (int i = w.lo; i <= w.hi; ++i) {
      const double diff = rho[i] - rho_ref[i];
      ref_peak = std::max(ref_peak, rho_ref[i]);
      linf = std::max(linf, std::abs(diff));
      const double wt = (i == w.lo || i == w.hi) ? 0.5 : 1.0;  // trapezoid
      num2 += wt * diff * diff;
      den2 += wt * rho_ref[i] * rho_ref[i];
    }
    if (!(ref_peak > 0.0) || !(den2 > 0.0))
      throw InvalidSpec("invariance_metrics: reference density vanishes in window");
    out.shape_err_Linf[s] = linf / ref_peak;
    out.shape_err_L2[s] = static_cast<double>(std::sqrt(num2 / den2));

    if (shape.normalizable) {
      real_array xr(n);
      for (int i = 0; i < n; ++i) xr[i] = g.x(i) * rho[i];
      out.centroid_err[s] =
          trapezoid(xr, g.dx) / trapezoid(rho, g.dx) - ms.d;
    } else {
      int ip = w.lo;
      for (int i = w.lo; i <= w.hi; ++i)
        if (rho[i] > rho[ip]) ip = i;
      out.centroid_err[s] = detail::refine_peak(g, rho, ip) - ms.d;
    }

    out.norm[s] = probability(psi);
    const real_array j = probability_current(psi, units);
    double flux = 0.0;
    for (int i = w.lo; i <= w.hi; ++i)
      flux = std::max(flux, std::abs(j[i] - ms.d_dot * rho[i]));
    out.flux_residual[s] = flux;
    out.phase_residual[s] = phase_linearity(psi, window).rms_residual;
  }
  return out;
}

// <H> = <psi| -(hbar^2/2m) d2/dx2 + V |psi> / <psi|psi>, trapezoid integrals.
inline EnergyReport energy_expectation(const WaveFunction& psi,
                                       const PotentialSpec& pot, double t,
                                       const UnitSystem& units) {
  validate(units);
  if (!pot.is_real())
    throw ComplexPotential("energy_expectation: potential must be real");
  const Grid& g = psi.grid;
  const int n = g.n_points;
  if (static_cast<int>(psi.values.size()) != n)
    throw GridMismatch("energy_expectation: wavefunction length mismatch");

  const complex_array d2 = second_derivative(psi);
  complex_array kin_integrand(n), pot_integrand(n);
  real_array rho(n);
  const double kpref = -units.hbar * units.hbar / (2.0 * units.mass);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> c = std::conj(psi.values[i]);
    kin_integrand[i] = c * (kpref * d2[i]);
    pot_integrand[i] =
        c * (real_potential_value(pot.real, g.x(i), t, units) * psi.values[i]);
    rho[i] = std::norm(psi.values[i]);
  }
  const double nrm2 = trapezoid(rho, g.dx);
  if (!(nrm2 > 0.0))
    throw InvalidSpec("energy_expectation: zero-norm wavefunction");
  EnergyReport rep;
  rep.kinetic = std::real(trapezoid(kin_integrand, g.dx)) / nrm2;
  rep.potential = std::real(trapezoid(pot_integrand, g.dx)) / nrm2;
  rep.total = rep.kinetic + rep.potential;
  return rep;
}

// Windowed norm of i hbar dpsi/dt + (hbar^2/2m) d2psi/dx2 - V psi with a
// centered time difference across each snapshot triple, normalized by the
// windowed norm of H psi (so the result is a relative residual). Returns one
// value per snapshot; the endpoints replicate their nearest interior value.
inline real_array schrodinger_residual_series(
    const std::vector<Snapshot>& snapshots, const PotentialSpec& pot,
    const UnitSystem& units, const AnalysisWindow& window) {
  if (snapshots.size() < 3)
    throw InsufficientSnapshots("schrodinger_residual: need >= 3 snapshots");
  const Grid& g = snapshots.front().wavefunction.grid;
  const detail::WindowIndices w = detail::window_indices(g, window);
  const std::size_t ns = snapshots.size();
  const double spacing = snapshots[1].wavefunction.time -
                         snapshots[0].wavefunction.time;
  for (std::size_t s = 0; s + 1 < ns; ++s) {
    if (!(snapshots[s + 1].wavefunction.grid == g))
      throw GridMismatch("schrodinger_residual: snapshots on different grids");
    const double gap =
        snapshots[s + 1].wavefunction.time - snapshots[s].wavefunction.time;
    if (std::abs(gap - spacing) > 1e-9 * std::max(1.0, std::abs(spacing)))
      throw InvalidSpec("schrodinger_residual: snapshots must be uniformly spaced");
  }

  const double kpref = -units.hbar * units.hbar / (2.0 * units.mass);
  real_array out(ns, 0.0);
  for (std::size_t s = 1; s + 1 < ns; ++s) {
    const WaveFunction& psi = snapshots[s].wavefunction;
    const complex_array d2 = second_derivative(psi);
    long double r2 = 0.0, h2 = 0.0;
    for (int i = w.lo; i <= w.hi; ++i) {
      const std::complex<double> dpsi_dt =
          (snapshots[s + 1].wavefunction.values[i] -
           snapshots[s - 1].wavefunction.values[i]) /
          (2.0 * spacing);
      const std::complex<double> h_psi =
          kpref * d2[i] +
          potential_value(pot, g.x(i), psi.time, units) * psi.values[i];
      const std::complex<double> resid =
          std::complex<double>(0.0, units.hbar) * dpsi_dt - h_psi;
      const double wt = (i == w.lo || i == w.hi) ? 0.5 : 1.0;
      r2 += wt * std::norm(resid);
      h2 += wt * std::norm(h_psi);
    }
    if (!(h2 > 0.0))
      throw InvalidSpec("schrodinger_residual: H psi vanishes in the window");
    out[s] = static_cast<double>(std::sqrt(r2 / h2));
  }
  out.front() = out[1];
  out.back() = out[ns - 2];
  return out;
}

inline double schrodinger_residual(const std::vector<Snapshot>& snapshots,
                                   const PotentialSpec& pot,
                                   const UnitSystem& units,
                                   const AnalysisWindow& window) {
  const real_array series =
      schrodinger_residual_series(snapshots, pot, units, window);
  double mx = 0.0;
  for (std::size_t s = 1; s + 1 < series.size(); ++s)
    mx = std::max(mx, series[s]);
  return mx;
}

}  // namespace nonspread
