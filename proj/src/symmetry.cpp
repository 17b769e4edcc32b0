#include "critlab/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

// Set of flattened arrays compared in max-entry norm. Entries are bucketed by
// a fixed linear functional so a lookup only scans three buckets.
class ToleranceSet {
 public:
  ToleranceSet(std::size_t width, double tol) : tol_(tol), weights_(width) {
    for (std::size_t i = 0; i < width; ++i) weights_[i] = 1.0 + 0.6180339887 * static_cast<double>(i % 7);
    double wsum = 0.0;
    for (double w : weights_) wsum += w;
    cell_ = std::max(1e3 * tol * wsum, 1e-12);
  }

  // Index of an existing entry within tolerance, or npos.
  std::size_t find(const double* v) const {
    const long long key = key_of(v);
    for (long long k = key - 1; k <= key + 1; ++k) {
      auto it = buckets_.find(k);
      if (it == buckets_.end()) continue;
      for (std::size_t idx : it->second) {
        if (close(v, &data_[idx * weights_.size()])) return idx;
      }
    }
    return npos;
  }

  // Inserts v unless present; returns true if inserted.
  bool insert(const double* v) {
    if (find(v) != npos) return false;
    const std::size_t idx = count_++;
    data_.insert(data_.end(), v, v + weights_.size());
    buckets_[key_of(v)].push_back(idx);
    return true;
  }

  std::size_t size() const { return count_; }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  long long key_of(const double* v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * v[i];
    return static_cast<long long>(std::floor(s / cell_));
  }
  bool close(const double* a, const double* b) const {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (std::abs(a[i] - b[i]) > tol_) return false;
    }
    return true;
  }

  double tol_;
  std::vector<double> weights_;
  double cell_;
  std::size_t count_ = 0;
  std::vector<double> data_;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

// Orthonormal null space of a stacked matrix; singular values below tol count
// as zero.
Matrix null_space(const Matrix& stacked, double tol) {
  const auto n = stacked.cols();
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = i < sv.size() ? sv(i) : 0.0;
    if (s <= tol) cols.push_back(i);
  }
  Matrix basis(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) basis.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(cols[j]);
  return basis;
}

Matrix fixed_of(const std::vector<Matrix>& elements, int dim) {
  const Matrix I = Matrix::Identity(dim, dim);
  Matrix stacked(static_cast<Eigen::Index>(elements.size()) * dim, dim);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    stacked.block(static_cast<Eigen::Index>(k) * dim, 0, dim, dim) = elements[k] - I;
  }
  return null_space(stacked, kMatrixTol);
}

Matrix intersect(const Matrix& a, const Matrix& b) {
  const auto n = a.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix stacked(2 * n, n);
  stacked.topRows(n) = I - a * a.transpose();
  stacked.bottomRows(n) = I - b * b.transpose();
  return null_space(stacked, 1e-8);
}

Vector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = g(rng);
  return v / v.norm();
}

// A generic point of span(basis): random combination, unit length.
Vector generic_point(const Matrix& basis, std::mt19937_64& rng) {
  Vector c = random_unit(rng, static_cast<int>(basis.cols()));
  Vector v = basis * c;
  return v / v.norm();
}

// Fixed subspaces of single non-identity elements, closed under pairwise
// intersection with those (nonzero results only).
std::vector<Matrix> candidate_subspaces(const GroupClosure& closure) {
  constexpr std::size_t kMaxSubspaces = 2000;
  const int n = closure.dim;
  std::vector<Matrix> base;
  ToleranceSet seen(static_cast<std::size_t>(n * n), 1e-7);
  auto add = [&](const Matrix& basis, std::vector<Matrix>& into) {
    if (basis.cols() == 0) return false;
    const Matrix proj = basis * basis.transpose();
    if (!seen.insert(proj.data())) return false;
    into.push_back(basis);
    return true;
  };
  for (std::size_t k = 1; k < closure.elements.size() && base.size() < kMaxSubspaces; ++k) {
    add(fixed_of({closure.elements[k]}, n), base);
  }
  std::vector<Matrix> all = base;
  for (std::size_t i = 0; i < all.size() && all.size() < kMaxSubspaces; ++i) {
    for (const auto& f : base) {
      if (all.size() >= kMaxSubspaces) break;
      if (all[i].cols() == 1) break;
      add(intersect(all[i], f), all);
    }
  }
  return all;
}

}  // namespace

void GroupSpec::validate() const {
  require(dim >= 1, "GroupSpec: dim must be >= 1");
  require(!generators.empty(), "GroupSpec: at least one generator is required");
  const Matrix I = Matrix::Identity(dim, dim);
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& g = generators[k];
    require(g.rows() == dim && g.cols() == dim,
            "GroupSpec: generator " + std::to_string(k) + " is not " + std::to_string(dim) +
                "x" + std::to_string(dim));
    const double err = (g.transpose() * g - I).cwiseAbs().maxCoeff();
    require(err <= kMatrixTol, "GroupSpec: generator " + std::to_string(k) +
                                   " is not orthogonal (|g^T g - I| = " + std::to_string(err) + ")");
  }
}

GroupClosure close_group(const GroupSpec& spec, std::size_t max_order) {
  spec.validate();
  require(max_order >= 1, "close_group: max_order must be >= 1");
  const int n = spec.dim;
  GroupClosure out;
  out.dim = n;
  ToleranceSet seen(static_cast<std::size_t>(n * n), kMatrixTol);
  const Matrix I = Matrix::Identity(n, n);
  seen.insert(I.data());
  out.elements.push_back(I);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const Matrix current = out.elements[queue.front()];
    queue.pop_front();
    for (const auto& g : spec.generators) {
      Matrix next = current * g;
      if (!seen.insert(next.data())) continue;
      if (out.elements.size() >= max_order) return out;
      out.elements.push_back(std::move(next));
      queue.push_back(out.elements.size() - 1);
    }
  }
  out.complete = true;
  return out;
}

Matrix fixed_subspace(const GroupClosure& closure) {
  require(closure.complete, "fixed_subspace: closure is incomplete (group order exceeds max_order)");
  return fixed_of(closure.elements, closure.dim);
}

std::vector<Vector> orbit(const GroupClosure& closure, const Vector& x) {
  require(x.size() == closure.dim, "orbit: point dimension does not match the group");
  const double scale = std::max(x.norm(), 1e-300);
  ToleranceSet seen(static_cast<std::size_t>(closure.dim), 1e-8 * scale);
  std::vector<Vector> pts;
  for (const auto& g : closure.elements) {
    Vector y = g * x;
    if (seen.insert(y.data())) pts.push_back(std::move(y));
  }
  return pts;
}

std::size_t orbit_size(const GroupClosure& closure, const Vector& x) {
  return orbit(closure, x).size();
}

OrbitReport min_orbit_card(const GroupClosure& closure, std::uint64_t seed) {
  require(closure.dim >= 1 && !closure.elements.empty(), "min_orbit_card: empty closure");
  OrbitReport rep;
  rep.complete = closure.complete;
  rep.group_order = closure.order();
  // The truncated list still contains every generator, so its common fixed
  // space is Fix(G) even for incomplete closures.
  const Matrix fix = fixed_of(closure.elements, closure.dim);
  rep.fix_dim = static_cast<int>(fix.cols());
  std::mt19937_64 rng(seed);

  if (rep.fix_dim >= 1) {
    rep.l = 1;
    rep.witness = fix.col(0);
    rep.sample_floor = 1;
    return rep;
  }

  constexpr int kSamples = 1000;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  Vector witness;
  for (int s = 0; s < kSamples; ++s) {
    Vector x = random_unit(rng, closure.dim);
    const auto k = orbit_size(closure, x);
    if (k < best) {
      best = k;
      witness = x;
    }
  }
  rep.sample_floor = best;
  if (!closure.complete) {
    rep.witness = witness;
    return rep;
  }
  for (const auto& basis : candidate_subspaces(closure)) {
    const Vector x = generic_point(basis, rng);
    const auto k = orbit_size(closure, x);
    if (k < best) {
      best = k;
      witness = x;
    }
  }
  rep.l = best;
  rep.witness = witness;
  return rep;
}

MuReport mu_G(const GroupClosure& closure, const DomainSampler& domain, double c_infty,
              std::size_t samples, std::uint64_t seed) {
  require(closure.complete, "mu_G: closure is incomplete");
  require(samples >= 1, "mu_G: need at least one sample");
  require(static_cast<bool>(domain.sample) && static_cast<bool>(domain.contains),
          "mu_G: domain sampler is not set");
  std::mt19937_64 rng(seed);
  std::vector<Matrix> projectors;
  const Matrix fix = fixed_of(closure.elements, closure.dim);
  if (fix.cols() > 0) projectors.push_back(fix * fix.transpose());
  for (const auto& b : candidate_subspaces(closure)) projectors.push_back(b * b.transpose());

  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = domain.sample(rng);
    require(x.size() == closure.dim, "mu_G: sampled point has the wrong dimension");
    best = std::min(best, orbit_size(closure, x));
    const double r = x.norm();
    for (const auto& P : projectors) {
      Vector y = P * x;
      const double ny = y.norm();
      if (ny <= 1e-12 * std::max(r, 1.0)) continue;
      y *= r / ny;
      if (domain.contains(y)) best = std::min(best, orbit_size(closure, y));
    }
  }
  return {best, static_cast<double>(best) * c_infty};
}

DomainSampler annulus_domain(int dim, double R1, double R2) {
  require(dim >= 1, "annulus_domain: dim must be >= 1");
  require(R1 >= 0.0 && R2 > R1, "annulus_domain: need 0 <= R1 < R2");
  DomainSampler d;
  d.sample = [dim, R1, R2](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = std::pow(R1, dim);
    const double b = std::pow(R2, dim);
    const double r = std::pow(a + (b - a) * u(rng), 1.0 / dim);
    return Vector(random_unit(rng, dim) * r);
  };
  d.contains = [R1, R2](const Vector& x) {
    const double r = x.norm();
    const double eps = 1e-12 * R2;
    return r >= R1 - eps && r <= R2 + eps;
  };
  return d;
}

double orbit_separation(const Vector& y, const GroupClosure& closure) {
  require(y.norm() > 0.0, "orbit_separation: y must be nonzero");
  const auto pts = orbit(closure, y);
  if (pts.size() < 2) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
  }
  return best;
}

Matrix plane_rotation(int dim, int i, int j, double angle) {
  require(i >= 0 && j >= 0 && i < dim && j < dim && i != j,
          "plane_rotation: plane indices out of range");
  Matrix R = Matrix::Identity(dim, dim);
  R(i, i) = std::cos(angle);
  R(j, j) = std::cos(angle);
  R(i, j) = -std::sin(angle);
  R(j, i) = std::sin(angle);
  return R;
}

}  // namespace critlab
