#include <doctest.h>

#include <cmath>

#include "critlab/calibration.hpp"
#include "critlab/errors.hpp"
#include "critlab/sobolev.hpp"

using namespace critlab;

TEST_CASE("geometric partition") {
  const auto r = partition_radii(0.125, 1.0, 3);
  REQUIRE(r.size() == 4);
  CHECK(r.front() == 1.0);
  CHECK(r.back() == 0.125);
  CHECK(r[1] == doctest::Approx(0.5));
  CHECK(r[2] == doctest::Approx(0.25));
  CHECK_THROWS_AS(partition_radii(1.0, 0.5, 2), DomainError);
  CHECK_THROWS_AS(partition_radii(0.1, 1.0, 0), DomainError);
}

TEST_CASE("calibrated family has equal energies and disjoint supports") {
  const AnnulusSpec spec{0.125, 1.0, {4, 2.0}};
  const auto fam = build_family(spec, 3, 512);
  REQUIRE(fam.size() == 3);
  for (double l : fam.levels) CHECK(std::abs(l - fam.common_level) <= 1e-6 * fam.common_level);
  // omega_i vanishes outside [r_i, r_{i-1}].
  for (std::size_t i = 0; i < 3; ++i) {
    const double lo = fam.radii[i + 1];
    const double hi = fam.radii[i];
    for (std::size_t k = 0; k < fam.grid.size(); ++k) {
      const double r = fam.grid.node(k);
      if (r <= lo * (1.0 + 1e-12) || r >= hi * (1.0 - 1e-12)) CHECK(fam.omegas[i][k] == 0.0);
    }
  }
  // Level of the direct solve on the piece ratio.
  const double direct = annulus_level(AnnulusSpec{0.5, 1.0, {4, 2.0}}, 512);
  CHECK(fam.common_level == doctest::Approx(direct).epsilon(1e-4));

  const auto cand = sign_changing_candidate(fam);
  CHECK(cand.min_value() < 0.0);
  CHECK(cand.max_value() > 0.0);
  CHECK(energy_J(cand) == doctest::Approx(3.0 * fam.common_level).epsilon(1e-10));
  CHECK(energy_J(nehari_project(cand)) == doctest::Approx(3.0 * fam.common_level).epsilon(1e-8));
}

TEST_CASE("span energy bound") {
  const auto fam = build_family(AnnulusSpec{0.125, 1.0, {3, 2.0}}, 3, 256);
  CHECK_THROWS_AS(span_energy_bound(fam, 0), DomainError);
  CHECK_THROWS_AS(span_energy_bound(fam, 3), DomainError);
  CHECK(span_energy_bound(fam, 1) == doctest::Approx(2.0 * fam.common_level).epsilon(1e-8));
  CHECK(span_energy_bound(fam, 2) == doctest::Approx(3.0 * fam.common_level).epsilon(1e-8));
  for (std::size_t k : {1, 2}) {
    const auto chk = span_energy_check(fam, k, 2000, 42);
    CHECK(chk.max_sampled <= chk.bound + 1e-12);
    CHECK(chk.samples == 2000);
  }
}

TEST_CASE("threshold ratios") {
  ThresholdOptions t;
  t.cells = 512;
  t.c_infty = sobolev_constant(4, 2.0).c_infty;
  const AnnulusSpec spec{0.1, 1.0, {4, 2.0}};
  const double l0 = threshold_l0(spec, t);
  CHECK(l0 == doctest::Approx(annulus_level(spec, 512) / t.c_infty).epsilon(1e-12));
  CHECK(l0 > 1.0);
  // m = 1 uses the square roots of the radii.
  const double multi = threshold_l0_multi(spec, 1, t);
  const double root = annulus_level(AnnulusSpec{std::sqrt(0.1), 1.0, {4, 2.0}}, 512);
  CHECK(multi == doctest::Approx(2.0 * root / t.c_infty).epsilon(1e-12));
  CHECK(resolve_c_infty({4, 2.0}, t) == t.c_infty);
}

TEST_CASE("small-hole threshold") {
  ThresholdOptions t;
  t.cells = 1024;
  t.bisection_steps = 12;
  t.c_infty = sobolev_constant(4, 2.0).c_infty;
  // Shooting oracle: c(0.005, 1) = 1.056 c_inf and c(0.001, 1) = 1.012 c_inf,
  // so the 5% gap closes between R = 0.004 and R = 0.005.
  const auto th = threshold_small_hole(0.05 * t.c_infty, {4, 2.0}, t);
  CHECK(th.conclusive);
  CHECK(th.R_delta > 0.004);
  CHECK(th.R_delta < 0.005);
  CHECK(th.level <= t.c_infty * 1.05);

  const auto tiny = threshold_small_hole(1e-5 * t.c_infty, {4, 2.0}, t);
  CHECK_FALSE(tiny.conclusive);
  CHECK_FALSE(tiny.note.empty());
  CHECK_THROWS_AS(threshold_small_hole(-1.0, {4, 2.0}, t), DomainError);
}
