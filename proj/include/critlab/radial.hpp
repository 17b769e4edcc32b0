#pragma once

// Piecewise-linear radial functions on one-dimensional grids and the discrete
// p-Dirichlet energy / critical Lebesgue norm built on them.
//
// A radial function u(|x|) on an annulus R1 < |x| < R2 in R^N is stored by its
// nodal values. All integrals carry the unit-sphere measure |S^{N-1}|:
//
//   grad term   |S^{N-1}| * sum_k |s_k|^p * int_{r_k}^{r_{k+1}} r^{N-1} dr
//   Lp* term    |S^{N-1}| * trapezoid of |u|^{p*} r^{N-1}
//
// where s_k is the slope of u on cell k. The cell integral of r^{N-1} is exact,
// which makes every functional here exactly invariant under the dilation
// u -> l^{(p-N)/p} u(./l) applied to both nodes and values.

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace critlab {

enum class Spacing { uniform, logarithmic };

/// Dimension N, exponent p and the derived critical exponent p* = Np/(N-p).
struct Exponents {
  int dim = 3;
  double p = 2.0;

  [[nodiscard]] double critical() const { return dim * p / (dim - p); }
  /// Throws DomainError unless N >= 2 and 1.1 <= p <= N - 0.1.
  void validate() const;
};

struct AnnulusSpec {
  double R1 = 0.5;
  double R2 = 1.0;
  Exponents exps;

  void validate() const;
};

class RadialGrid {
 public:
  static constexpr std::size_t kMinCells = 2;

  RadialGrid(std::vector<double> nodes, Exponents exps,
             Spacing spacing = Spacing::logarithmic);

  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] std::size_t cells() const { return nodes_.size() - 1; }
  [[nodiscard]] const Exponents& exps() const { return exps_; }
  [[nodiscard]] int dim() const { return exps_.dim; }
  [[nodiscard]] double p() const { return exps_.p; }
  [[nodiscard]] Spacing spacing() const { return spacing_; }
  [[nodiscard]] double inner() const { return nodes_.front(); }
  [[nodiscard]] double outer() const { return nodes_.back(); }

  /// int_{r_k}^{r_{k+1}} r^{N-1} dr, computed without cancellation.
  [[nodiscard]] std::span<const double> cell_weights() const { return cell_w_; }
  /// Trapezoid weights r_i^{N-1} (h_{i-1} + h_i) / 2.
  [[nodiscard]] std::span<const double> node_weights() const { return node_w_; }

  /// Index of the node equal to r within a relative tolerance, or npos.
  [[nodiscard]] std::size_t find_node(double r, double rel_tol = 1e-12) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> nodes_;
  Exponents exps_;
  Spacing spacing_;
  std::vector<double> cell_w_;
  std::vector<double> node_w_;
};

class RadialFunction {
 public:
  /// With dirichlet = true both end values must be exactly zero.
  RadialFunction(RadialGrid grid, std::vector<double> values,
                 bool dirichlet = true);

  /// Zero function on `grid`.
  static RadialFunction zero(RadialGrid grid, bool dirichlet = true);

  [[nodiscard]] const RadialGrid& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool dirichlet() const { return dirichlet_; }

  /// Piecewise-linear value at radius r; zero outside [inner, outer].
  [[nodiscard]] double at(double r) const;
  /// Slope of the cell containing r; zero outside the grid.
  [[nodiscard]] double slope_at(double r) const;

  [[nodiscard]] double max_value() const;
  [[nodiscard]] double min_value() const;
  [[nodiscard]] bool is_zero() const;

  [[nodiscard]] RadialFunction scaled(double c) const;
  [[nodiscard]] RadialFunction abs() const;
  [[nodiscard]] RadialFunction plus(const RadialFunction& other,
                                    double weight = 1.0) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  bool dirichlet_;
};

/// |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2).
double sphere_measure(int dim);

/// Grid on [R1, R2] with M cells.
RadialGrid make_grid(const AnnulusSpec& spec, std::size_t cells,
                     Spacing spacing = Spacing::logarithmic);

/// Log-equispaced nodes from a to b (inclusive), with exact end points.
std::vector<double> log_nodes(double a, double b, std::size_t cells);

double grad_norm_p(const RadialFunction& u);
double lpstar_norm_pow(const RadialFunction& u);
double energy_J(const RadialFunction& u);
/// int |grad u|^p / (int |u|^{p*})^{p/p*}. Throws DomainError on u == 0.
double rayleigh_Q(const RadialFunction& u);
/// Nodal gradient of energy_J. Boundary components are zero under Dirichlet.
RadialFunction gradient_J(const RadialFunction& u);

/// Split of the nodal gradient into its stiffness and source parts.
struct WeakResidual {
  std::vector<double> stiffness;  // d/du_i (1/p) int |u'|^p
  std::vector<double> source;     // d/du_i (1/p*) int |u|^{p*}
};
WeakResidual weak_residual(const RadialFunction& u);

/// Solves P x = rhs on interior nodes, x_0 = x_M = 0, for the tridiagonal
/// P = sum_k c_k (e_{k+1} - e_k)(e_{k+1} - e_k)^T with c_k > 0.
std::vector<double> solve_stiffness(std::span<const double> c,
                                    std::span<const double> rhs);

/// Relative residual of the split in the dual norm ||f||_* = sqrt(f^T K^{-1} f)
/// of the weighted Laplacian K (c_k = |S^{N-1}| w_k / h_k^2), interior nodes:
/// ||A - B||_* / (||A||_* + ||B||_*).
double dual_residual(const RadialGrid& grid, const WeakResidual& parts);

/// Relative weak residual of -(r^{N-1}|u'|^{p-2}u')' = r^{N-1}|u|^{p*-2}u,
/// i.e. dual_residual(weak_residual(u)); zero for u == 0.
double ode_residual(const RadialFunction& u);

/// Re-express u on `target`, whose nodes must contain u's nodes as a
/// contiguous run. Values outside u's support are zero.
RadialFunction extend_by_zero(const RadialFunction& u, const RadialGrid& target);
/// Restriction of u to nodes [first, last] as a Dirichlet function.
RadialFunction restrict_to(const RadialFunction& u, std::size_t first,
                           std::size_t last);

/// CSV with header `r,value`, 17 significant digits.
void write_csv(std::ostream& os, const RadialFunction& u);
RadialFunction read_csv(std::istream& is, Exponents exps, bool dirichlet = true);

/// |t|^{q-2} t, continuously extended by 0 at t = 0 (q > 1).
inline double signed_pow(double t, double q) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), q - 1.0), t);
}

}  // namespace critlab
