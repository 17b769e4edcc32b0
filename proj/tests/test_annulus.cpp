#include <doctest.h>

#include <cmath>

#include "critlab/annulus.hpp"
#include "critlab/errors.hpp"
#include "critlab/sobolev.hpp"

using namespace critlab;

TEST_CASE("solve options and grid size are validated") {
  const AnnulusSpec spec{0.5, 1.0, {3, 2.0}};
  CHECK_THROWS_AS(minimize_annulus(spec, 32), DomainError);
  SolveOptions bad;
  bad.residual_tol = -1.0;
  CHECK_THROWS_AS(minimize_annulus(spec, 128, bad), DomainError);
  SolveOptions custom;
  custom.init = InitKind::custom;
  CHECK_THROWS_AS(minimize_annulus(spec, 128, custom), DomainError);
}

TEST_CASE("descent produces a positive Nehari minimiser") {
  const AnnulusSpec spec{0.5, 1.0, {3, 2.0}};
  const auto sol = minimize_annulus(spec, 512);
  REQUIRE(sol.report.converged);
  CHECK(sol.report.residual <= 1e-6);
  CHECK(sol.report.method == Method::descent);
  CHECK(sol.report.nehari_defect <= 1e-12);
  for (std::size_t i = 1; i + 1 < sol.profile.size(); ++i) CHECK(sol.profile[i] > 0.0);
  for (std::size_t i = 1; i < sol.report.history.size(); ++i) {
    CHECK(sol.report.history[i] <= sol.report.history[i - 1] * (1.0 + 1e-14));
  }
  CHECK(energy_J(sol.profile) == doctest::Approx(sol.report.level).epsilon(1e-13));
  CHECK(sol.report.level == doctest::Approx(std::pow(sol.report.Q, 1.5) / 3.0).epsilon(1e-12));
}

TEST_CASE("a custom initial guess is honoured") {
  const AnnulusSpec spec{0.5, 1.0, {4, 2.0}};
  const auto grid = make_grid(spec, 256);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (grid.node(i) - 0.5) * (1.0 - grid.node(i));
  v.front() = 0.0;
  v.back() = 0.0;
  SolveOptions o;
  o.init = InitKind::custom;
  o.custom_init = RadialFunction(grid, v, true);
  const auto a = minimize_annulus(spec, 256, o);
  const auto b = minimize_annulus(spec, 256);
  CHECK(a.report.converged);
  CHECK(a.report.level == doctest::Approx(b.report.level).epsilon(1e-8));
}

TEST_CASE("shooting and descent agree") {
  for (Exponents e : {Exponents{3, 2.0}, Exponents{4, 3.0}}) {
    const AnnulusSpec spec{0.5, 1.0, e};
    const auto d = minimize_annulus(spec, 1024);
    const auto s = shoot_annulus(spec);
    REQUIRE(s.report.converged);
    CHECK(s.report.method == Method::shooting);
    CHECK(s.report.shooting_slope > 0.0);
    CHECK(std::abs(d.report.level - s.report.level) <= 1e-4 * s.report.level);
    CHECK(s.profile[0] == 0.0);
    CHECK(s.profile[s.profile.size() - 1] == 0.0);
  }
}

TEST_CASE("scaling identity on matched grids") {
  CHECK(scaling_check(AnnulusSpec{0.2, 2.0, {4, 2.0}}, 512) <= 1e-6);
  CHECK(scaling_check(AnnulusSpec{1.0, 5.0, {3, 2.0}}, 512) <= 1e-6);
}

TEST_CASE("level curve is monotone and approaches c_inf slowly") {
  const Exponents e{4, 2.0};
  const double c_inf = sobolev_constant(4, 2.0).c_infty;
  const auto rows = c_curve(e, {0.01, 0.5, 0.1}, c_inf, 1024);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].R == 0.5);
  CHECK(rows[2].R == 0.01);
  CHECK(rows[0].level > rows[1].level);
  CHECK(rows[1].level > rows[2].level);
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(r.level >= c_inf * (1.0 - 2e-4));
    CHECK(r.excess == doctest::Approx(r.level - c_inf));
  }
  // Two-solver oracle: c(0.01, 1) is 1.11 c_inf, about 0.11 c_inf above the quantum.
  CHECK(rows[2].excess / c_inf > 0.10);
  CHECK(rows[2].excess / c_inf < 0.12);
  CHECK_THROWS_AS(c_curve(e, {1.5}, c_inf, 256), DomainError);
}

TEST_CASE("annulus_level reports non-convergence") {
  SolveOptions o;
  o.max_iters = 1;
  CHECK_THROWS_AS(annulus_level(AnnulusSpec{0.5, 1.0, {3, 2.0}}, 256, o), NonConvergenceError);
}
