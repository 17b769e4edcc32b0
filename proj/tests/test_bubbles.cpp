#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critlab/bubbles.hpp"
#include "critlab/errors.hpp"
#include "critlab/sobolev.hpp"
#include "critlab/symmetry.hpp"

using namespace critlab;

namespace {

double closed_form_S(int N, double p) {
  const double n = N;
  const double g = std::tgamma(1.0 + n / 2.0) * std::tgamma(n) /
                   (std::tgamma(n / p) * std::tgamma(1.0 + n - n / p));
  const double C = std::pow(std::numbers::pi, -0.5) * std::pow(n, -1.0 / p) *
                   std::pow((p - 1.0) / (n - p), 1.0 - 1.0 / p) * std::pow(g, 1.0 / n);
  return std::pow(C, -p);
}

GroupClosure trivial(int dim) { return close_group(GroupSpec{dim, {Matrix::Identity(dim, dim)}}); }

BubbleConfig single(int dim, double p, const Vector& y, double scale, double weight = 1.0) {
  BubbleConfig cfg;
  cfg.dim = dim;
  cfg.bubbles.push_back({TalentiBubble{y, scale, calibrate_talenti(dim, p), weight}, trivial(dim)});
  return cfg;
}

MCParams mc(std::size_t n = 100000, std::uint64_t seed = 7) {
  MCParams m;
  m.samples = n;
  m.seed = seed;
  return m;
}

}  // namespace

TEST_CASE("evaluation of a single bubble") {
  Vector y(3);
  y << 1.0, 0.0, 0.0;
  const auto cfg = single(3, 2.0, y, 0.5);
  const auto& U = cfg.bubbles[0].bubble.profile;
  CHECK(evaluate_config(cfg, y) == doctest::Approx(std::pow(0.5, -0.5) * talenti_eval(U, 0.0)));
  Vector x(3);
  x << 1.0, 1.0, 0.0;
  CHECK(evaluate_config(cfg, x) == doctest::Approx(std::pow(0.5, -0.5) * talenti_eval(U, 2.0)));
}

TEST_CASE("exact bubble integrals reproduce S^{N/p}") {
  for (Exponents e : {Exponents{3, 2.0}, Exponents{4, 2.0}, Exponents{4, 3.0}}) {
    const auto U = calibrate_talenti(e.dim, e.p);
    const double S = closed_form_S(e.dim, e.p);
    const double target = std::pow(S, e.dim / e.p);
    CHECK(talenti_grad_norm_p(U) == doctest::Approx(target).epsilon(1e-5));
    CHECK(talenti_lpstar_pow(U) == doctest::Approx(target).epsilon(1e-5));
    CHECK(talenti_phi_infty(U) == doctest::Approx(target / e.dim).epsilon(1e-5));
    CHECK(talenti_nehari_phi_infty(U) == doctest::Approx(target / e.dim).epsilon(1e-5));
  }
}

TEST_CASE("monte carlo gradient norm of a single bubble") {
  Vector y = Vector::Zero(3);
  const auto cfg = single(3, 2.0, y, 1.0);
  const double exact = talenti_grad_norm_p(cfg.bubbles[0].bubble.profile);
  const auto est = config_norm_p(cfg, mc());
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.value - exact) <= 4.0 * est.std_error);
  CHECK(est.std_error <= 0.01 * exact);
  // Critical dilations leave the norm unchanged.
  const auto small = config_norm_p(single(3, 2.0, y, 0.01), mc());
  CHECK(std::abs(small.value - exact) <= 4.0 * small.std_error);
}

TEST_CASE("amplitude scaling is p-homogeneous") {
  Vector y = Vector::Zero(4);
  const auto a = config_norm_p(single(4, 3.0, y, 1.0), mc());
  const auto b = config_norm_p(single(4, 3.0, y, 1.0, 2.0), mc());
  CHECK(b.value / a.value == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("runs are reproducible for a fixed seed") {
  Vector y = Vector::Zero(3);
  const auto cfg = single(3, 2.0, y, 1.0);
  const auto a = config_phi_infty(cfg, mc(20000, 3));
  const auto b = config_phi_infty(cfg, mc(20000, 3));
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  const auto c = config_phi_infty(cfg, mc(20000, 4));
  CHECK(c.value != a.value);
  CHECK(std::abs(c.value - a.value) <= 5.0 * std::hypot(a.std_error, c.std_error));
}

TEST_CASE("validation of parameters and configurations") {
  Vector y = Vector::Zero(3);
  const auto cfg = single(3, 2.0, y, 1.0);
  CHECK_THROWS_AS(config_norm_p(cfg, mc(5000)), DomainError);
  auto bad = cfg;
  bad.bubbles[0].bubble.scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  auto wrong = cfg;
  wrong.bubbles[0].bubble.center = Vector::Zero(2);
  CHECK_THROWS_AS(wrong.validate(), DomainError);
  auto open = cfg;
  open.bubbles[0].group = close_group(GroupSpec{3, {plane_rotation(3, 0, 1, 1.0)}}, 50);
  CHECK_THROWS_AS(open.validate(), DomainError);
}

TEST_CASE("orbit placement and separation warning") {
  Vector y = Vector::Zero(3);
  y(0) = 1.0;
  auto cfg = single(3, 2.0, y, 0.5);
  cfg.bubbles[0].group = close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}});
  const auto pl = place_bubbles(cfg);
  REQUIRE(pl.copies.size() == 2);
  CHECK(pl.multiplicity[0] == 2);
  CHECK(pl.separation_ratio == doctest::Approx(4.0));
  CHECK(pl.warning);
  cfg.bubbles[0].bubble.scale = 0.01;
  const auto far = place_bubbles(cfg);
  CHECK(far.separation_ratio == doctest::Approx(200.0));
  CHECK_FALSE(far.warning);
  CHECK(std::isinf(place_bubbles(single(3, 2.0, y, 1.0)).separation_ratio));
}

TEST_CASE("additivity of well separated bubbles") {
  Vector y = Vector::Zero(4);
  y(0) = 10.0;
  auto cfg = single(4, 2.0, y, 0.1);
  cfg.bubbles[0].group = close_group(GroupSpec{4, {-Matrix::Identity(4, 4)}});
  const auto rep = additivity_check(cfg, mc());
  const double single_norm = talenti_grad_norm_p(cfg.bubbles[0].bubble.profile);
  CHECK(rep.norm_prediction == doctest::Approx(2.0 * single_norm).epsilon(1e-12));
  CHECK(rep.norm_total.value / single_norm == doctest::Approx(2.0).epsilon(0.01));
  CHECK(rep.deviation() <= 0.02);

  // One bubble interacts with nothing.
  const auto lone = additivity_check(single(4, 2.0, y, 0.1), mc());
  CHECK(lone.norm_deviation.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("interaction decays with distance") {
  Vector a = Vector::Zero(4);
  BubbleConfig cfg;
  cfg.dim = 4;
  const auto U = calibrate_talenti(4, 2.0);
  double prev = 1e300;
  for (double d : {10.0, 100.0}) {
    Vector b = Vector::Zero(4);
    b(0) = d;
    cfg.bubbles = {{TalentiBubble{a, 1.0, U, 1.0}, trivial(4)}, {TalentiBubble{b, 1.0, U, 1.0}, trivial(4)}};
    const auto rep = additivity_check(cfg, mc());
    CHECK(rep.norm_deviation.value < prev);
    prev = rep.norm_deviation.value;
  }
}

TEST_CASE("projected energy of a bubble equals the quantum") {
  const auto S = sobolev_constant(4, 2.0);
  const auto cfg = single(4, 2.0, Vector::Zero(4), 1.0, 3.0);
  const auto e = projected_energy(cfg, mc());
  CHECK(std::abs(e.value - S.c_infty) <= 4.0 * e.std_error + 1e-3 * S.c_infty);
}

TEST_CASE("energy quantum check") {
  QuantumOptions o;
  o.cells_per_piece = 512;
  const auto U = calibrate_talenti(3, 2.0);
  const auto rep = energy_quantum_check(U, o);
  CHECK(rep.phi == doctest::Approx(rep.c_infty).epsilon(1e-3));
  CHECK(rep.above_quantum);
  CHECK(rep.two_cap_ok);
  CHECK(rep.two_cap_level >= 2.0 * rep.c_infty);
  auto off = U;
  off.beta *= 2.0;
  const auto rep2 = energy_quantum_check(off, o);
  CHECK(rep2.phi < rep.phi);
  CHECK(rep2.projected_phi == doctest::Approx(rep.projected_phi).epsilon(1e-4));
}
