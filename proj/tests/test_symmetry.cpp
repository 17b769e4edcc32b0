#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "critlab/errors.hpp"
#include "critlab/symmetry.hpp"

using namespace critlab;

namespace {

const double kPi = std::numbers::pi;

Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ();
}

Matrix reflection(int n, int i) {
  Matrix M = Matrix::Identity(n, n);
  M(i, i) = -1.0;
  return M;
}

}  // namespace

TEST_CASE("closure of small groups") {
  CHECK(close_group(GroupSpec{3, {Matrix::Identity(3, 3)}}).order() == 1);
  CHECK(close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}}).order() == 2);
  const auto c5 = close_group(GroupSpec{4, {plane_rotation(4, 0, 1, 2 * kPi / 5)}});
  CHECK(c5.complete);
  CHECK(c5.order() == 5);
  // Dihedral group of the square.
  const auto d4 = close_group(GroupSpec{2, {plane_rotation(2, 0, 1, kPi / 2), reflection(2, 0)}});
  CHECK(d4.order() == 8);
  CHECK((d4.elements.front() - Matrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("closure is closed under products and inverses") {
  const auto g = close_group(GroupSpec{3, {plane_rotation(3, 0, 1, kPi / 3), reflection(3, 2)}});
  REQUIRE(g.complete);
  auto contains = [&](const Matrix& m) {
    for (const auto& e : g.elements) {
      if ((e - m).cwiseAbs().maxCoeff() <= 1e-9) return true;
    }
    return false;
  };
  for (const auto& a : g.elements) {
    CHECK(contains(a.transpose()));
    for (const auto& b : g.elements) CHECK(contains(a * b));
  }
}

TEST_CASE("generator validation and overflow") {
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(close_group(GroupSpec{2, {bad}}), DomainError);
  CHECK_THROWS_AS(close_group(GroupSpec{3, {Matrix::Identity(2, 2)}}), DomainError);
  CHECK_THROWS_AS(close_group(GroupSpec{2, {}}), DomainError);
  // Rotation by 1 radian generates an infinite group.
  const auto inf = close_group(GroupSpec{2, {plane_rotation(2, 0, 1, 1.0)}}, 500);
  CHECK_FALSE(inf.complete);
  CHECK(inf.order() == 500);
  CHECK_THROWS_AS(fixed_subspace(inf), DomainError);
  const auto rep = min_orbit_card(inf);
  CHECK_FALSE(rep.l.has_value());
  CHECK(rep.sample_floor == 500);
  // Same rotation in R^3 keeps a fixed axis, so l = 1 regardless.
  const auto axis = min_orbit_card(close_group(GroupSpec{3, {plane_rotation(3, 0, 1, 1.0)}}, 500));
  CHECK(axis.l == 1);
  CHECK(axis.fix_dim == 1);
}

TEST_CASE("fixed subspaces") {
  CHECK(fixed_subspace(close_group(GroupSpec{3, {Matrix::Identity(3, 3)}})).cols() == 3);
  CHECK(fixed_subspace(close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}})).cols() == 0);
  const auto fix = fixed_subspace(close_group(GroupSpec{4, {plane_rotation(4, 0, 1, 2 * kPi / 5)}}));
  REQUIRE(fix.cols() == 2);
  CHECK(fix.row(0).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fix.row(1).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((fix.transpose() * fix - Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("minimal orbit cardinality") {
  CHECK(min_orbit_card(close_group(GroupSpec{3, {Matrix::Identity(3, 3)}})).l == 1);
  const auto pm = min_orbit_card(close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}}));
  CHECK(pm.l == 2);
  CHECK(pm.fix_dim == 0);
  const double a = 2 * kPi / 3;
  const auto g3 = close_group(GroupSpec{4, {plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a)}});
  const auto r3 = min_orbit_card(g3);
  CHECK(r3.l == 3);
  CHECK(orbit_size(g3, r3.witness) == 3);
  // Square symmetries: points on a mirror axis have orbit 4, generic points 8.
  const auto d4 = close_group(GroupSpec{2, {plane_rotation(2, 0, 1, kPi / 2), reflection(2, 0)}});
  CHECK(min_orbit_card(d4).l == 4);
  // Z6 x Z4 acting on two planes: the smaller factor sets l.
  const auto z = close_group(GroupSpec{4, {plane_rotation(4, 0, 1, kPi / 3), plane_rotation(4, 2, 3, kPi / 2)}});
  CHECK(z.order() == 24);
  CHECK(min_orbit_card(z).l == 4);
}

TEST_CASE("orbit sizes divide the group order") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const auto grp = close_group(GroupSpec{3, {plane_rotation(3, 0, 1, kPi / 3), reflection(3, 2), reflection(3, 0)}});
  REQUIRE(grp.complete);
  for (int s = 0; s < 1000; ++s) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = g(rng);
    if (s % 3 == 0) x(2) = 0.0;
    CHECK(grp.order() % orbit_size(grp, x) == 0);
  }
}

TEST_CASE("l is invariant under conjugation") {
  std::mt19937_64 rng(21);
  const Matrix Q = random_orthogonal(4, rng);
  const double a = 2 * kPi / 3;
  const Matrix B = plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, kPi / 2);
  const auto plain = min_orbit_card(close_group(GroupSpec{4, {B, reflection(4, 3)}}));
  const auto conj = min_orbit_card(close_group(GroupSpec{4, {Q * B * Q.transpose(), Q * reflection(4, 3) * Q.transpose()}}));
  CHECK(plain.l == conj.l);
  CHECK(plain.fix_dim == conj.fix_dim);
}

TEST_CASE("mu_G on annular domains") {
  const auto pm = close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}});
  const auto mu = mu_G(pm, annulus_domain(3, 0.5, 1.0), 4.0, 200, 3);
  CHECK(mu.multiplier == 2);
  CHECK(mu.value == doctest::Approx(8.0));
  // Domain meeting Fix(G) gives a singleton orbit.
  const auto rot = close_group(GroupSpec{3, {plane_rotation(3, 0, 1, kPi / 2)}});
  CHECK(mu_G(rot, annulus_domain(3, 0.5, 1.0), 4.0, 200, 3).multiplier == 1);
  const auto d4 = close_group(GroupSpec{2, {plane_rotation(2, 0, 1, kPi / 2), reflection(2, 0)}});
  CHECK(mu_G(d4, annulus_domain(2, 0.5, 1.0), 1.0, 200, 3).multiplier == 4);
  CHECK_THROWS_AS(mu_G(pm, annulus_domain(3, 0.5, 1.0), 1.0, 0, 3), DomainError);
}

TEST_CASE("orbit separation") {
  const auto pm = close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}});
  Vector e1 = Vector::Zero(3);
  e1(0) = 1.0;
  CHECK(orbit_separation(e1, pm) == doctest::Approx(2.0));
  CHECK(orbit_separation(2.0 * e1, pm) == doctest::Approx(4.0));
  const auto c3 = close_group(GroupSpec{2, {plane_rotation(2, 0, 1, 2 * kPi / 3)}});
  Vector y(2);
  y << std::cos(0.3), std::sin(0.3);
  CHECK(orbit_separation(y, c3) == doctest::Approx(std::sqrt(3.0)));
  CHECK(orbit_separation(2.0 * y, c3) == doctest::Approx(2.0 * std::sqrt(3.0)));
  const auto triv = close_group(GroupSpec{3, {Matrix::Identity(3, 3)}});
  CHECK(std::isinf(orbit_separation(e1, triv)));
  CHECK_THROWS_AS(orbit_separation(Vector::Zero(3), pm), DomainError);
}
