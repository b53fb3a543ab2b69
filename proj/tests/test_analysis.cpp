#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nonspread/analysis.hpp"
#include "nonspread/constructor.hpp"
#include "nonspread/errors.hpp"
#include "nonspread/specfun.hpp"

using namespace nonspread;
using Catch::Matchers::WithinAbs;

namespace {

ShapeSolution gaussian_solution(const Grid& q, double sigma) {
  ShapeSolution s;
  s.q_grid = q;
  s.normalizable = true;
  s.f.resize(q.n_points);
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  for (int i = 0; i < q.n_points; ++i)
    s.f[i] = norm * std::exp(-q.x(i) * q.x(i) / (4.0 * sigma * sigma));
  return s;
}

// free spreading of a unit-sigma Gaussian (hbar = m = 1)
WaveFunction spreading_gaussian(const Grid& g, double t) {
  WaveFunction psi;
  psi.grid = g;
  psi.time = t;
  psi.values.resize(g.n_points);
  const std::complex<double> shear(1.0, 0.5 * t);
  const std::complex<double> amp =
      std::pow(2.0 * std::numbers::pi, -0.25) / std::sqrt(shear);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    psi.values[i] = amp * std::exp(-x * x / (4.0 * shear));
  }
  return psi;
}

}  // namespace

TEST_CASE("current of a real wavefunction vanishes", "[analysis]") {
  const Grid g = make_grid(-10.0, 10.0, 512);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    psi.values[i] = std::exp(-0.5 * g.x(i) * g.x(i));
  for (double j : probability_current(psi, UnitSystem{}))
    REQUIRE_THAT(j, WithinAbs(0.0, 1e-14));
}

TEST_CASE("current of a plane wave is k times the density", "[analysis]") {
  const Grid g = make_grid(-6.0, 6.0, 2048);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  const double k = 2.0;
  for (int i = 0; i < g.n_points; ++i)
    psi.values[i] = std::complex<double>(std::cos(k * g.x(i)),
                                         std::sin(k * g.x(i)));
  const real_array j = probability_current(psi, UnitSystem{});
  for (int i = 0; i < g.n_points; ++i)
    REQUIRE_THAT(j[i], WithinAbs(k * std::norm(psi.values[i]), 1e-4));
}

TEST_CASE("assembled packet satisfies the flux identity", "[analysis]") {
  // j = d_dot * rho for a rigidly moving packet; the residual is pure dx^2
  // discretization error, so a fine grid pushes it below 1e-8
  const UnitSystem u;
  const Grid g = make_grid(-8.0, 8.0, 65536);
  const double t = 0.7, x0 = 0.5;
  const WaveFunction psi = sho_reference(0, x0, 1.0, g, t, u);
  const real_array j = probability_current(psi, u);
  const double d_dot = x0 * std::cos(t);

  double worst = 0.0;
  for (int i = g.n_points / 4; i < 3 * g.n_points / 4; ++i)
    worst = std::max(worst, std::abs(j[i] - d_dot * std::norm(psi.values[i])));
  REQUIRE(worst < 1e-8);
}

TEST_CASE("flux residual scales as dx squared", "[analysis]") {
  const UnitSystem u;
  auto residual_at = [&](int n) {
    const Grid g = make_grid(-12.0, 12.0, n);
    const WaveFunction psi = sho_reference(0, 1.0, 1.0, g, 0.7, u);
    const real_array j = probability_current(psi, u);
    const double d_dot = std::cos(0.7);
    double worst = 0.0;
    for (int i = n / 4; i < 3 * n / 4; ++i)
      worst = std::max(worst, std::abs(j[i] - d_dot * std::norm(psi.values[i])));
    return worst;
  };
  const double coarse = residual_at(2049);
  const double fine = residual_at(4097);
  REQUIRE(coarse / fine > 3.5);
  REQUIRE(coarse / fine < 4.5);
}

TEST_CASE("translation fairness: an assembled packet scores zero", "[analysis]") {
  // dyadic spacing and a lattice-commensurate drift make the resampling
  // exact, so every shape metric must vanish to rounding
  const UnitSystem u;
  const Grid g = make_grid(-12.0, 12.0, 4097);  // dx = 3 * 2^-9 exactly
  const PotentialSpec pot{Harmonic{1.0, 0.0}, 0.0};
  const EffectivePotential veff = effective_potential(pot, MotionRest{}, g, 0.0, u);
  const ShapeSolution shape = solve_shape(veff, 1, u)[0];

  const MotionSpec motion = make_motion_polynomial({0.0, 4.0 * g.dx});
  real_array times(2001);
  for (int i = 0; i < 2001; ++i) times[i] = 1e-3 * i;
  const PhaseTrack track =
      build_phase(PotentialSpec{FreeSpace{}, 0.0}, motion, shape.E_eff, times, u);

  std::vector<Snapshot> snaps;
  for (int k = 0; k <= 4; ++k) {
    const double t = 0.25 * k;  // drift lands on exactly k grid spacings
    snaps.push_back(Snapshot{assemble_packet(shape, motion, track, g, t), k});
  }

  const InvarianceMetrics m = invariance_metrics(snaps, shape, motion,
                                                 AnalysisWindow{}, u);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    REQUIRE_THAT(m.shape_err_Linf[s], WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(m.shape_err_L2[s], WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(m.centroid_err[s], WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(m.norm[s], WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(m.flux_residual[s], WithinAbs(0.0, 1e-6));
    REQUIRE_THAT(m.phase_residual[s], WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("a spreading gaussian is caught by the shape metrics", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-40.0, 40.0, 2048);
  const ShapeSolution shape = gaussian_solution(g, 1.0);

  std::vector<Snapshot> snaps;
  for (int k = 0; k <= 4; ++k)
    snaps.push_back(Snapshot{spreading_gaussian(g, 0.5 * k), k});

  const InvarianceMetrics m =
      invariance_metrics(snaps, shape, MotionRest{}, AnalysisWindow{}, u);

  REQUIRE_THAT(m.shape_err_Linf[0], WithinAbs(0.0, 1e-12));
  double worst_shape = 0.0, worst_phase = 0.0;
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    worst_shape = std::max(worst_shape, m.shape_err_Linf[s]);
    worst_phase = std::max(worst_phase, m.phase_residual[s]);
    REQUIRE_THAT(m.norm[s], WithinAbs(1.0, 1e-8));  // free evolution is unitary
  }
  REQUIRE(worst_shape > 0.1);   // peak density drops by ~29% at t = 2
  REQUIRE(worst_phase > 1e-2);  // the chirp is far from a linear phase
}

TEST_CASE("phase linearity recovers slope and intercept", "[analysis]") {
  const Grid g = make_grid(-20.0, 20.0, 1024);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  const double norm = std::pow(2.0 * std::numbers::pi, -0.25);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    const double theta = 0.5 * x + 0.3;
    psi.values[i] = norm * std::exp(-x * x / 4.0) *
                    std::complex<double>(std::cos(theta), std::sin(theta));
  }
  const PhaseLinearity fit = phase_linearity(psi, AnalysisWindow{});
  REQUIRE_THAT(fit.slope, WithinAbs(0.5, 1e-10));
  REQUIRE(fit.rms_residual < 1e-10);
  // intercept is determined modulo pi
  double gap = std::abs(fit.intercept - 0.3);
  gap = std::min({gap, std::abs(gap - std::numbers::pi),
                  std::abs(gap - 2.0 * std::numbers::pi)});
  REQUIRE_THAT(gap, WithinAbs(0.0, 1e-8));
}

TEST_CASE("phase fit survives the sign flips of excited states", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-12.0, 12.0, 2048);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    const double theta = 0.7 * x;
    psi.values[i] = sho_eigenfunction(2, x, u, 1.0) *
                    std::complex<double>(std::cos(theta), std::sin(theta));
  }
  const PhaseLinearity fit = phase_linearity(psi, AnalysisWindow{});
  REQUIRE_THAT(fit.slope, WithinAbs(0.7, 1e-8));
  REQUIRE(fit.rms_residual < 1e-8);
}

TEST_CASE("phase fit needs enough supported points", "[analysis]") {
  const Grid g = make_grid(-10.0, 10.0, 256);
  WaveFunction psi;
  psi.grid = g;
  psi.values.assign(g.n_points, {0.0, 0.0});
  psi.values[128] = {1.0, 0.0};
  psi.values[129] = {1.0, 0.0};
  REQUIRE_THROWS_AS(phase_linearity(psi, AnalysisWindow{}), InsufficientSupport);
}

TEST_CASE("energy of a stationary state", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-10.0, 10.0, 6144);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    psi.values[i] = sho_eigenfunction(0, g.x(i), u, 1.0);

  const PotentialSpec pot{Harmonic{1.0, 0.0}, 0.0};
  const EnergyReport rep = energy_expectation(psi, pot, 0.0, u);
  REQUIRE_THAT(rep.total, WithinAbs(0.5, 1e-6));
  REQUIRE_THAT(rep.kinetic + rep.potential, WithinAbs(rep.total, 1e-12));
  REQUIRE_THAT(rep.kinetic, WithinAbs(0.25, 1e-5));
  REQUIRE_THAT(rep.potential, WithinAbs(0.25, 1e-5));
}

TEST_CASE("energy of coherent packets includes the classical part", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-10.0, 10.0, 16384);
  const PotentialSpec pot{Harmonic{1.0, 0.0}, 0.0};

  const WaveFunction ground = sho_reference(0, 1.0, 1.0, g, 0.3, u);
  REQUIRE_THAT(energy_expectation(ground, pot, 0.3, u).total,
               WithinAbs(1.0, 1e-5));  // E_0 + x0^2/2

  const WaveFunction excited = sho_reference(2, 1.0, 1.0, g, 0.3, u);
  REQUIRE_THAT(energy_expectation(excited, pot, 0.3, u).total,
               WithinAbs(3.0, 1e-5));  // E_2 + x0^2/2
}

TEST_CASE("energy requires a real potential", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-10.0, 10.0, 256);
  WaveFunction psi;
  psi.grid = g;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    psi.values[i] = std::exp(-0.5 * g.x(i) * g.x(i));
  REQUIRE_THROWS_AS(
      energy_expectation(psi, make_absorber(FreeSpace{}, 0.05), 0.0, u),
      ComplexPotential);
}

TEST_CASE("equation residual of an exact solution is discretization-limited",
          "[analysis]") {
  const UnitSystem u;
  const PotentialSpec pot{FreeSpace{}, 0.0};

  auto residual_for = [&](int n_points, double dt_snap) {
    const Grid g = make_grid(-60.0, 40.0, n_points);
    std::vector<Snapshot> snaps;
    for (int k = -1; k <= 1; ++k)
      snaps.push_back(
          Snapshot{airy_reference(1.0, g, 1.0 + k * dt_snap, u), k + 1});
    return schrodinger_residual(snaps, pot, u, AnalysisWindow{});
  };

  const double coarse = residual_for(10001, 1e-3);  // dx = 0.01
  REQUIRE(coarse < 1e-3);
  const double fine = residual_for(20001, 5e-4);  // dx, dt both halved
  REQUIRE(coarse / fine > 3.5);
  REQUIRE(coarse / fine < 4.5);
}

TEST_CASE("equation residual flags a frozen state", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-40.0, 40.0, 1024);
  std::vector<Snapshot> snaps;
  for (int k = 0; k < 3; ++k) {
    WaveFunction psi = spreading_gaussian(g, 0.0);  // never evolves
    psi.time = k * 1e-3;
    snaps.push_back(Snapshot{psi, k});
  }
  const double r =
      schrodinger_residual(snaps, PotentialSpec{FreeSpace{}, 0.0}, u,
                           AnalysisWindow{});
  REQUIRE(r > 0.5);
  REQUIRE(r < 1.5);  // i hbar dpsi/dt = 0, so the residual is exactly H psi
}

TEST_CASE("equation residual input validation", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-40.0, 40.0, 64);
  std::vector<Snapshot> two;
  for (int k = 0; k < 2; ++k)
    two.push_back(Snapshot{spreading_gaussian(g, 1e-3 * k), k});
  REQUIRE_THROWS_AS(schrodinger_residual(two, PotentialSpec{FreeSpace{}, 0.0},
                                         u, AnalysisWindow{}),
                    InsufficientSnapshots);

  std::vector<Snapshot> uneven;
  for (double t : {0.0, 1e-3, 3e-3}) {
    WaveFunction psi = spreading_gaussian(g, t);
    uneven.push_back(Snapshot{psi, 0});
  }
  REQUIRE_THROWS_AS(schrodinger_residual(uneven, PotentialSpec{FreeSpace{}, 0.0},
                                         u, AnalysisWindow{}),
                    InvalidSpec);
}

TEST_CASE("metrics reject support crossing the analysis window", "[analysis]") {
  const UnitSystem u;
  const Grid g = make_grid(-12.0, 12.0, 1024);
  const ShapeSolution wide = gaussian_solution(g, 8.0);
  WaveFunction psi;
  psi.grid = g;
  psi.time = 0.0;
  psi.values.resize(g.n_points);
  for (int i = 0; i < g.n_points; ++i) psi.values[i] = wide.f[i];
  const std::vector<Snapshot> snaps{Snapshot{psi, 0}};
  REQUIRE_THROWS_AS(
      invariance_metrics(snaps, wide, MotionRest{}, AnalysisWindow{}, u),
      SupportEscape);
}

TEST_CASE("analysis window validation", "[analysis]") {
  const Grid g = make_grid(-10.0, 10.0, 256);
  WaveFunction psi;
  psi.grid = g;
  psi.values.assign(g.n_points, {1.0, 0.0});
  REQUIRE_THROWS_AS(phase_linearity(psi, AnalysisWindow{0.0, 1e-6}), InvalidSpec);
  REQUIRE_THROWS_AS(phase_linearity(psi, AnalysisWindow{1.2, 1e-6}), InvalidSpec);
}
