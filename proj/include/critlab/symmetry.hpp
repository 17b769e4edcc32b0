#pragma once

// Finite subgroups of O(N): closure from generators, fixed subspace, orbits
// and the minimal orbit cardinality l(G) = min { #Gx : x != 0 }.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace critlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kMatrixTol = 1e-9;
inline constexpr std::size_t kDefaultMaxOrder = 10000;

struct GroupSpec {
  int dim = 0;
  std::vector<Matrix> generators;

  /// Throws DomainError for wrong shapes or non-orthogonal generators.
  void validate() const;
};

struct GroupClosure {
  int dim = 0;
  std::vector<Matrix> elements;  // elements[0] is the identity
  bool complete = false;

  [[nodiscard]] std::size_t order() const { return elements.size(); }
};

/// Breadth-first closure under right multiplication by generators; stops
/// (complete = false) once max_order elements exist.
GroupClosure close_group(const GroupSpec& spec, std::size_t max_order = kDefaultMaxOrder);

/// Orthonormal basis (columns) of Fix(G); zero columns when Fix(G) = {0}.
/// Throws DomainError for incomplete closures.
Matrix fixed_subspace(const GroupClosure& closure);

/// Distinct points of the orbit Gx (deduplicated at kMatrixTol * |x|).
std::vector<Vector> orbit(const GroupClosure& closure, const Vector& x);
std::size_t orbit_size(const GroupClosure& closure, const Vector& x);

struct OrbitReport {
  /// l(G); empty when the closure is incomplete.
  std::optional<std::size_t> l;
  /// For incomplete closures: smallest orbit count seen on random samples
  /// under the truncated element list, a floor for the true orbit sizes.
  std::size_t sample_floor = 0;
  int fix_dim = 0;
  Vector witness;
  std::size_t group_order = 0;
  bool complete = false;
};

/// Minimal orbit over x != 0. Candidates are points of Fix(g) and of greedy
/// intersections of such subspaces (maximal stabilisers fix subspaces), with
/// 1000 random unit vectors as a floor check.
OrbitReport min_orbit_card(const GroupClosure& closure, std::uint64_t seed = 1);

/// A G-invariant domain, given by a sampler of its closure and a membership
/// predicate.
struct DomainSampler {
  std::function<Vector(std::mt19937_64&)> sample;
  std::function<bool(const Vector&)> contains;
};

struct MuReport {
  std::size_t multiplier = 0;  // min orbit cardinality over the samples
  double value = 0.0;          // multiplier * c_inf
};

/// min_{x in domain} #Gx * c_inf over `samples` draws plus their projections
/// onto Fix(G) and onto the fixed subspaces of single elements.
MuReport mu_G(const GroupClosure& closure, const DomainSampler& domain, double c_infty,
              std::size_t samples = 1000, std::uint64_t seed = 1);

/// Sampler for the annulus R1 <= |x| <= R2 in R^dim.
DomainSampler annulus_domain(int dim, double R1, double R2);

/// Minimal distance between distinct points of Gy; +inf for singleton orbits.
/// Throws DomainError for y = 0.
double orbit_separation(const Vector& y, const GroupClosure& closure);

/// Rotation by `angle` in the (i, j) coordinate plane of R^dim.
Matrix plane_rotation(int dim, int i, int j, double angle);

}  // namespace critlab
