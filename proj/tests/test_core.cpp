#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "nonspread/calculus.hpp"
#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"

using namespace nonspread;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid construction and lookup", "[core]") {
  const Grid g = make_grid(-2.0, 3.0, 101);
  REQUIRE_THAT(g.dx, WithinRel(0.05, 1e-15));
  REQUIRE_THAT(g.x(0), WithinAbs(-2.0, 0.0));
  REQUIRE_THAT(g.x(100), WithinAbs(3.0, 1e-13));
  REQUIRE_THAT(g.x(40), WithinAbs(0.0, 1e-14));
  REQUIRE(g == make_grid(-2.0, 3.0, 101));
  REQUIRE_FALSE(g == make_grid(-2.0, 3.0, 102));
}

TEST_CASE("grid rejects degenerate input", "[core]") {
  REQUIRE_THROWS_AS(make_grid(1.0, 1.0, 64), InvalidGrid);
  REQUIRE_THROWS_AS(make_grid(2.0, -2.0, 64), InvalidGrid);
  REQUIRE_THROWS_AS(make_grid(-1.0, 1.0, 15), InvalidGrid);
  REQUIRE_THROWS_AS(make_grid(-1.0, std::nan(""), 64), InvalidGrid);
  REQUIRE_NOTHROW(make_grid(-1.0, 1.0, 16));
}

TEST_CASE("unit system validation", "[core]") {
  UnitSystem u;
  REQUIRE_NOTHROW(validate(u));
  u.hbar = 0.0;
  REQUIRE_THROWS_AS(validate(u), InvalidSpec);
  u.hbar = 1.0;
  u.mass = -2.0;
  REQUIRE_THROWS_AS(validate(u), InvalidSpec);
}

TEST_CASE("trapezoid integrates linear functions exactly", "[core]") {
  real_array f(64);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 3.0 * i - 7.0;
  const double h = 0.25;
  // integral of a line = average of endpoints times length
  const double expect = 0.5 * (f.front() + f.back()) * h * (f.size() - 1);
  REQUIRE_THAT(trapezoid(f, h), WithinRel(expect, 1e-15));
}

TEST_CASE("trapezoid handles complex samples", "[core]") {
  const int n = 4001;
  const double h = std::numbers::pi / (n - 1);
  complex_array f(n);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    f[i] = {std::sin(x), std::cos(x)};
  }
  const std::complex<double> I = trapezoid(f, h);
  REQUIRE_THAT(I.real(), WithinAbs(2.0, 1e-6));
  REQUIRE_THAT(I.imag(), WithinAbs(0.0, 1e-12));
}

namespace {
double antiderivative(double x) {
  // integral of exp(-x) cos(3x)
  return (std::exp(-x) * (3.0 * std::sin(3.0 * x) - std::cos(3.0 * x)) + 1.0) /
         10.0;
}

double simpson_worst_error(int n) {
  const double h = 2.0 / (n - 1);
  real_array f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(-i * h) * std::cos(3.0 * i * h);
  const real_array I = cumulative_simpson(f, h);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(I[i] - antiderivative(i * h)));
  return worst;
}
}  // namespace

TEST_CASE("cumulative simpson tracks the antiderivative", "[core]") {
  const real_array I = cumulative_simpson({1.0, 1.0, 1.0, 1.0, 1.0}, 0.1);
  REQUIRE_THAT(I[0], WithinAbs(0.0, 0.0));
  REQUIRE_THAT(I[4], WithinRel(0.4, 1e-14));

  REQUIRE(simpson_worst_error(257) < 1e-8);
}

TEST_CASE("cumulative simpson converges at fourth order", "[core]") {
  const double e1 = simpson_worst_error(257);
  const double e2 = simpson_worst_error(513);
  REQUIRE(e1 / e2 > 12.0);
  REQUIRE(e1 / e2 < 20.0);
}

TEST_CASE("cubic interpolation is exact on cubics", "[core]") {
  const double x0 = -1.0, dx = 0.125;
  std::vector<double> y(33);
  auto cubic = [](double x) { return ((2.0 * x - 1.0) * x + 3.0) * x - 0.5; };
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = cubic(x0 + i * dx);
  for (double x : {-0.9871, -0.5, 0.0313, 1.77, 2.999}) {
    REQUIRE_THAT(cubic_interp(x0, dx, y, x), WithinAbs(cubic(x), 1e-12));
  }
  REQUIRE_THROWS_AS(cubic_interp(0.0, 0.1, std::vector<double>{1.0, 2.0, 3.0}, 0.05),
                    InvalidSpec);
}

TEST_CASE("polynomial fit recovers exact coefficients", "[core]") {
  const int n = 400;
  real_array x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -10.0 + 20.0 * i / (n - 1);
    y[i] = 2.0 - 0.5 * x[i] + 0.25 * x[i] * x[i] * x[i];
  }
  const PolyFit fit = fit_polynomial(x, y, 8);
  REQUIRE(fit.coeffs.size() == 9);
  REQUIRE_THAT(fit.coeffs[0], WithinAbs(2.0, 1e-10));
  REQUIRE_THAT(fit.coeffs[1], WithinAbs(-0.5, 1e-10));
  REQUIRE_THAT(fit.coeffs[2], WithinAbs(0.0, 1e-10));
  REQUIRE_THAT(fit.coeffs[3], WithinAbs(0.25, 1e-10));
  for (int p = 4; p <= 8; ++p) REQUIRE_THAT(fit.coeffs[p], WithinAbs(0.0, 1e-10));
  REQUIRE(fit.rms_residual < 1e-9);
  REQUIRE_THROWS_AS(fit_polynomial({0.0, 1.0}, {1.0, 2.0}, 8), InvalidSpec);
}

TEST_CASE("thomas solver matches a dense reference", "[core]") {
  // diagonally dominant system with a known solution worked by substitution
  const std::vector<double> lower{1.0, -2.0, 0.5};
  const std::vector<double> upper{2.0, 1.0, -1.0};
  std::vector<double> diag{4.0, 5.0, 6.0, 4.0};
  const std::vector<double> xref{1.0, -2.0, 3.0, 0.25};
  std::vector<double> rhs(4);
  rhs[0] = diag[0] * xref[0] + upper[0] * xref[1];
  for (int i = 1; i < 3; ++i)
    rhs[i] = lower[i - 1] * xref[i - 1] + diag[i] * xref[i] + upper[i] * xref[i + 1];
  rhs[3] = lower[2] * xref[2] + diag[3] * xref[3];
  const auto sol = thomas_solve(diag, lower, upper, rhs);
  for (int i = 0; i < 4; ++i) REQUIRE_THAT(sol[i], WithinAbs(xref[i], 1e-13));
}

TEST_CASE("thomas solver flags a vanishing pivot", "[core]") {
  REQUIRE_THROWS_AS(thomas_solve<double>({0.0, 1.0}, {1.0}, {1.0}, {1.0, 1.0}),
                    SolverBreakdown);
}

TEST_CASE("second derivative is second-order accurate", "[core]") {
  // non-even function so the one-sided endpoint stencils actually matter
  auto probe = [](int n) {
    const double dx = 2.0 / (n - 1);
    real_array f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(0.7 * (-1.0 + i * dx));
    const real_array d2 = second_derivative_samples(f, dx);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(d2[i] - 0.49 * f[i]));
    return worst;
  };
  const double e1 = probe(201);
  const double e2 = probe(401);
  REQUIRE(e1 < 1e-4);
  REQUIRE(e1 / e2 > 3.0);  // one-sided ends keep it near 4 but not exactly
  REQUIRE(e1 / e2 < 5.0);
}

TEST_CASE("wavefunction inner product and norms", "[core]") {
  const Grid g = make_grid(-8.0, 8.0, 801);
  WaveFunction a, b;
  a.grid = b.grid = g;
  a.values.resize(g.n_points);
  b.values.resize(g.n_points);
  const double norm_const = std::pow(std::numbers::pi, -0.25);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    const double gauss = norm_const * std::exp(-0.5 * x * x);
    a.values[i] = gauss;
    b.values[i] = gauss * std::complex<double>(std::cos(x), std::sin(x));
  }
  REQUIRE_THAT(probability(a), WithinAbs(1.0, 1e-10));
  REQUIRE_THAT(l2_norm(a), WithinAbs(1.0, 1e-10));
  // <a|b> for a unit-k boost of a Gaussian is exp(-k^2/4)
  const std::complex<double> ip = inner_product(a, b);
  REQUIRE_THAT(ip.real(), WithinAbs(std::exp(-0.25), 1e-10));
  REQUIRE_THAT(ip.imag(), WithinAbs(0.0, 1e-12));

  WaveFunction c = a;
  c.grid = make_grid(-8.0, 8.0, 401);
  REQUIRE_THROWS_AS(inner_product(a, c), GridMismatch);
}
