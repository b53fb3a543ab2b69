#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "nonspread/constructor.hpp"
#include "nonspread/errors.hpp"

using namespace nonspread;
using Catch::Matchers::WithinAbs;

namespace {
real_array lattice(double t_final, int n) {
  real_array t(n);
  for (int i = 0; i < n; ++i) t[i] = t_final * i / (n - 1);
  return t;
}
}  // namespace

TEST_CASE("co-moving harmonic trap reduces to a clean oscillator", "[effective]") {
  // V = (1/2) m w^2 (x-d)^2 - m x d_ddot: the drive term cancels the frame
  // acceleration for ANY d(t), leaving V_eff = (1/2) m w^2 q^2 exactly.
  const UnitSystem u;
  const Grid q = make_grid(-8.0, 8.0, 257);
  const MotionSpec motion = MotionSinusoid{1.0, 1.0, 0.0};
  const PotentialSpec pot{MovingHarmonicDriven{1.0, motion, 1.0}, 0.0};

  for (double t : {0.0, 0.4, 1.1, 2.9}) {
    const EffectivePotential veff = effective_potential(pot, motion, q, t, u);
    REQUIRE_THAT(veff.poly_coeffs[2], WithinAbs(0.5, 1e-10));
    for (int p : {0, 1, 3, 4, 5, 6, 7, 8})
      REQUIRE_THAT(veff.poly_coeffs[p], WithinAbs(0.0, 1e-9));
    // samples, not just the fit, must be the parabola
    for (int i = 0; i < q.n_points; i += 16)
      REQUIRE_THAT(veff.samples[i], WithinAbs(0.5 * q.x(i) * q.x(i), 1e-10));
  }

  const ConsistencyReport rep =
      consistency_check(pot, motion, q, lattice(6.3, 33));
  REQUIRE(rep.consistent);
  REQUIRE(rep.offending_powers.empty());
  REQUIRE(rep.max_samplewise_variation < 1e-9);
}

TEST_CASE("driven quartic frame is exactly q^4 for any drift", "[effective]") {
  const UnitSystem u;
  const Grid q = make_grid(-10.0, 10.0, 257);
  const MotionSpec motion = make_motion_polynomial({0.0, 0.0, 0.2});
  const PotentialSpec pot{MovingQuarticDriven{1.0, motion}, 0.0};

  const EffectivePotential veff = effective_potential(pot, motion, q, 1.7, u);
  REQUIRE_THAT(veff.poly_coeffs[4], WithinAbs(1.0, 1e-8));
  REQUIRE(std::abs(veff.poly_coeffs[1]) < 1e-8);
  REQUIRE(std::abs(veff.poly_coeffs[2]) < 1e-8);
  REQUIRE(std::abs(veff.poly_coeffs[3]) < 1e-8);

  const ConsistencyReport rep =
      consistency_check(pot, motion, q, lattice(2.0, 33));
  REQUIRE(rep.consistent);
  REQUIRE(rep.max_samplewise_variation < 1e-9);
}

TEST_CASE("uniform force with the matched trajectory is consistent", "[effective]") {
  // m d_ddot = F(t) + B^3/2m makes V_eff = (B^3/2m) q, time-independent.
  const UnitSystem u;
  const Grid q = make_grid(-30.0, 30.0, 257);
  const PotentialSpec pot{UniformForce{ForceSinusoid{0.3, 2.0, 0.0}}, 0.0};
  const real_array times = lattice(2.0, 2001);
  const MotionSpec motion = motion_from_constraint(pot, 1.0, 0.0, times, u);

  for (double t : {0.0, 0.5, 1.5, 2.0}) {
    const EffectivePotential veff = effective_potential(pot, motion, q, t, u);
    REQUIRE_THAT(veff.poly_coeffs[1], WithinAbs(0.5, 1e-8));  // B^3/2m
    REQUIRE_THAT(veff.poly_coeffs[2], WithinAbs(0.0, 1e-8));
  }
  const ConsistencyReport rep = consistency_check(pot, motion, q, lattice(2.0, 33));
  REQUIRE(rep.consistent);
}

TEST_CASE("free space with constant acceleration gives a linear frame", "[effective]") {
  const UnitSystem u;
  const Grid q = make_grid(-40.0, 20.0, 257);
  const MotionSpec motion = make_motion_constant_accel(1.0, 1.0);
  const PotentialSpec pot{FreeSpace{}, 0.0};

  const EffectivePotential veff = effective_potential(pot, motion, q, 0.8, u);
  REQUIRE_THAT(veff.poly_coeffs[1], WithinAbs(0.5, 1e-10));
  for (int p : {0, 2, 3, 4}) REQUIRE_THAT(veff.poly_coeffs[p], WithinAbs(0.0, 1e-9));
  REQUIRE(consistency_check(pot, motion, q, lattice(2.0, 33)).consistent);
}

TEST_CASE("ramped trap frequency breaks consistency at power 2", "[effective]") {
  const UnitSystem u;
  const Grid q = make_grid(-12.0, 12.0, 257);
  const PotentialSpec pot{Harmonic{1.0, 0.1}, 0.0};
  const ConsistencyReport rep =
      consistency_check(pot, MotionRest{}, q, lattice(2.0, 33));

  REQUIRE_FALSE(rep.consistent);
  REQUIRE(rep.offending_powers == std::vector<int>{2});
  // coefficient of q^2 moves by ((1 + 0.1 t)^2 - 1)/2 over t in [0, 2]
  REQUIRE_THAT(rep.max_time_variation[2], WithinAbs(0.22, 1e-10));
  REQUIRE(rep.max_time_variation[4] < 1e-12);
}

TEST_CASE("translating a bare quartic breaks powers 1 through 3", "[effective]") {
  const UnitSystem u;
  const Grid q = make_grid(-10.0, 10.0, 257);
  const PotentialSpec pot{make_power_law(1.0, 4), 0.0};
  const MotionSpec motion = make_motion_polynomial({0.0, 1.0});
  const ConsistencyReport rep = consistency_check(pot, motion, q, lattice(2.0, 33));

  REQUIRE_FALSE(rep.consistent);
  REQUIRE(rep.offending_powers == std::vector<int>{1, 2, 3});
  // lambda (q + d)^4 expansion: variations 4d^3, 6d^2, 4d at d = 2
  REQUIRE_THAT(rep.max_time_variation[1], WithinAbs(32.0, 1e-8));
  REQUIRE_THAT(rep.max_time_variation[2], WithinAbs(24.0, 1e-8));
  REQUIRE_THAT(rep.max_time_variation[3], WithinAbs(8.0, 1e-8));
  REQUIRE(rep.max_time_variation[4] < 1e-10);
}

TEST_CASE("consistency checker input validation", "[effective]") {
  const UnitSystem u;
  const Grid q = make_grid(-4.0, 4.0, 64);
  const PotentialSpec damped = make_absorber(FreeSpace{}, 0.1);
  REQUIRE_THROWS_AS(effective_potential(damped, MotionRest{}, q, 0.0, u),
                    ComplexPotential);
  REQUIRE_THROWS_AS(
      consistency_check(PotentialSpec{}, MotionRest{}, q, lattice(1.0, 4)),
      InvalidSpec);
}
