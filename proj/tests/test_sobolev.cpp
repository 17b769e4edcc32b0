#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "critlab/errors.hpp"
#include "critlab/radial.hpp"
#include "critlab/sobolev.hpp"

using namespace critlab;

namespace {

// Best constant from the Gamma-function closed form.
double closed_form_S(int N, double p) {
  const double n = N;
  const double g = std::tgamma(1.0 + n / 2.0) * std::tgamma(n) /
                   (std::tgamma(n / p) * std::tgamma(1.0 + n - n / p));
  const double C = std::pow(std::numbers::pi, -0.5) * std::pow(n, -1.0 / p) *
                   std::pow((p - 1.0) / (n - p), 1.0 - 1.0 / p) * std::pow(g, 1.0 / n);
  return std::pow(C, -p);
}

double closed_form_beta(int N, double p, double alpha) {
  return (p - 1.0) / (N - p) * std::pow(N * alpha, -1.0 / (p - 1.0));
}

}  // namespace

TEST_CASE("closed-form oracle reproduces tabulated constants") {
  CHECK(closed_form_S(3, 2.0) == doctest::Approx(5.4779041).epsilon(1e-7));
  CHECK(closed_form_S(4, 2.0) == doctest::Approx(10.260399).epsilon(1e-7));
}

TEST_CASE("talenti profile evaluation") {
  const TalentiProfile U{2.0, 0.5, {3, 2.0}};
  CHECK(talenti_eval(U, 0.0) == doctest::Approx(std::pow(2.0, 1.0 - 1.5)));
  CHECK_THROWS_AS(talenti_eval(U, -1.0), DomainError);
  const double h = 1e-6;
  for (double r : {0.3, 1.0, 4.0}) {
    const double fd = (talenti_eval(U, r + h) - talenti_eval(U, r - h)) / (2.0 * h);
    CHECK(talenti_slope(U, r) == doctest::Approx(fd).epsilon(1e-7));
  }
  CHECK(talenti_slope(U, 0.0) == 0.0);
}

TEST_CASE("calibrated beta matches the closed form") {
  for (Exponents e : {Exponents{3, 2.0}, Exponents{4, 2.0}, Exponents{4, 3.0}}) {
    for (double alpha : {1.0, 2.0}) {
      const auto U = calibrate_talenti(e.dim, e.p, alpha);
      CHECK(U.beta == doctest::Approx(closed_form_beta(e.dim, e.p, alpha)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(calibrate_talenti(3, 2.0, 0.0), DomainError);
}

TEST_CASE("signed residual changes sign across the calibrated beta") {
  const double b = closed_form_beta(3, 2.0, 1.0);
  CHECK(talenti_signed_residual(3, 2.0, 1.0, 1.5 * b) > 0.0);
  CHECK(talenti_signed_residual(3, 2.0, 1.0, 0.5 * b) < 0.0);
}

TEST_CASE("sobolev constant against the classical value") {
  const auto r = sobolev_constant(3, 2.0);
  CHECK(r.S == doctest::Approx(closed_form_S(3, 2.0)).epsilon(5e-4));
  CHECK(r.c_infty == doctest::Approx(std::pow(r.S, 1.5) / 3.0).epsilon(1e-14));
  CHECK(r.grid_size == kDefaultSobolevCells);
  CHECK(r.truncation_radius == 1e4);
  CHECK(sobolev_constant(4, 2.0).S == doctest::Approx(closed_form_S(4, 2.0)).epsilon(1e-3));
  CHECK(sobolev_constant(4, 3.0).S == doctest::Approx(closed_form_S(4, 3.0)).epsilon(1e-3));
}

TEST_CASE("sobolev constant self-convergence and preconditions") {
  const double s1 = sobolev_constant(3, 2.0, 0.0, 1024).S;
  const double s2 = sobolev_constant(3, 2.0, 0.0, 2048).S;
  CHECK(std::abs(s2 - s1) / s2 <= 1e-3);
  CHECK_THROWS_AS(sobolev_constant(3, 2.0, 10.0), DomainError);
  CHECK_THROWS_AS(sobolev_constant(3, 2.0, 0.0, 100), DomainError);
  CHECK(default_truncation(4, 3.0) == doctest::Approx(1e8));
  CHECK(default_truncation(3, 2.0) == doctest::Approx(1e4));
}

TEST_CASE("nehari scale maximises the fibre map") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.1, 1.0);
  const Exponents e{4, 2.0};
  const auto g = make_grid(AnnulusSpec{0.2, 1.0, e}, 60);
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = d(rng);
  const RadialFunction u(g, v, true);
  const double ts = nehari_scale(grad_norm_p(u), lpstar_norm_pow(u), e.p, e.critical());
  // Brute-force scan of t -> J(t u).
  double best_t = 0.0;
  double best = -1e300;
  for (int i = 1; i <= 20000; ++i) {
    const double t = 3.0 * ts * i / 20000.0;
    const double J = energy_J(u.scaled(t));
    if (J > best) {
      best = J;
      best_t = t;
    }
  }
  CHECK(best_t == doctest::Approx(ts).epsilon(3e-4));
  CHECK(energy_J(u.scaled(ts)) >= best - 1e-12 * std::abs(best));
}

TEST_CASE("nehari identity on 100 random functions") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (Exponents e : {Exponents{3, 2.0}, Exponents{4, 2.0}, Exponents{4, 3.0}}) {
    const auto g = make_grid(AnnulusSpec{0.1, 1.0, e}, 150);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      std::vector<double> v(g.size(), 0.0);
      for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = d(rng);
      const RadialFunction u(g, v, true);
      const auto w = nehari_project(u);
      const double pred = std::pow(rayleigh_Q(u), e.dim / e.p) / e.dim;
      worst = std::max(worst, std::abs(energy_J(w) - pred) / energy_J(w));
      // On the manifold: int |w'|^p = int |w|^{p*}.
      CHECK(grad_norm_p(w) == doctest::Approx(lpstar_norm_pow(w)).epsilon(1e-12));
    }
    CHECK(worst <= 1e-10);
  }
  const auto g = make_grid(AnnulusSpec{0.1, 1.0, {3, 2.0}}, 10);
  CHECK_THROWS_AS(nehari_project(RadialFunction::zero(g)), DomainError);
}

TEST_CASE("dilation preserves the Rayleigh quotient") {
  const Exponents e{4, 3.0};
  const auto U = calibrate_talenti(4, 3.0);
  auto u = sample_profile(U, make_grid(AnnulusSpec{0.5, 2.0, e}, 300));
  std::vector<double> v(u.values().begin(), u.values().end());
  const double tail = v.back();
  for (auto& x : v) x -= tail;
  v.front() = 0.0;
  const RadialFunction w(u.grid(), v, true);
  for (double l : {0.1, 3.0, 10.0}) {
    CHECK(std::abs(rayleigh_Q(dilate(w, l)) - rayleigh_Q(w)) <= 1e-12 * rayleigh_Q(w));
  }
  CHECK_THROWS_AS(dilate(w, 0.0), DomainError);
}
