#include "critlab/radial.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

// (b^N - a^N) / N evaluated as (b - a) * sum_j a^j b^{N-1-j} / N.
double shell_integral(double a, double b, int dim) {
  double sum = 0.0;
  double apow = 1.0;
  double bpow = std::pow(b, dim - 1);
  for (int j = 0; j < dim; ++j) {
    sum += apow * bpow;
    apow *= a;
    bpow = (b != 0.0) ? bpow / b : 0.0;
  }
  // b == 0 only happens for a == b == 0.
  return (b - a) * sum / dim;
}

}  // namespace

void Exponents::validate() const {
  require(dim >= 2, "dimension N must be >= 2, got " + std::to_string(dim));
  require(p >= 1.1 && p <= dim - 0.1,
          "exponent p must lie in [1.1, N - 0.1], got p = " + std::to_string(p) +
              " with N = " + std::to_string(dim));
}

void AnnulusSpec::validate() const {
  exps.validate();
  require(R1 > 0.0, "inner radius R1 must be positive, got " + std::to_string(R1));
  require(R2 > R1, "outer radius R2 must exceed R1, got R1 = " +
                       std::to_string(R1) + ", R2 = " + std::to_string(R2));
}

RadialGrid::RadialGrid(std::vector<double> nodes, Exponents exps, Spacing spacing)
    : nodes_(std::move(nodes)), exps_(exps), spacing_(spacing) {
  exps_.validate();
  require(nodes_.size() >= kMinCells + 1,
          "grid needs at least " + std::to_string(kMinCells) + " cells");
  require(nodes_.front() >= 0.0, "grid nodes must be nonnegative");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    require(nodes_[i] > nodes_[i - 1], "grid nodes must be strictly increasing");
  }
  const std::size_t n = nodes_.size();
  cell_w_.resize(n - 1);
  node_w_.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cell_w_[k] = shell_integral(nodes_[k], nodes_[k + 1], exps_.dim);
    const double half = 0.5 * (nodes_[k + 1] - nodes_[k]);
    node_w_[k] += half * std::pow(nodes_[k], exps_.dim - 1);
    node_w_[k + 1] += half * std::pow(nodes_[k + 1], exps_.dim - 1);
  }
}

std::size_t RadialGrid::find_node(double r, double rel_tol) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), r * (1.0 - rel_tol));
  if (it != nodes_.end() && std::abs(*it - r) <= rel_tol * std::abs(r)) {
    return static_cast<std::size_t>(it - nodes_.begin());
  }
  return npos;
}

RadialFunction::RadialFunction(RadialGrid grid, std::vector<double> values,
                               bool dirichlet)
    : grid_(std::move(grid)), values_(std::move(values)), dirichlet_(dirichlet) {
  require(values_.size() == grid_.size(),
          "value count " + std::to_string(values_.size()) +
              " does not match node count " + std::to_string(grid_.size()));
  if (dirichlet_) {
    require(values_.front() == 0.0 && values_.back() == 0.0,
            "Dirichlet function must vanish at both end nodes");
  }
}

RadialFunction RadialFunction::zero(RadialGrid grid, bool dirichlet) {
  std::vector<double> v(grid.size(), 0.0);
  return RadialFunction(std::move(grid), std::move(v), dirichlet);
}

double RadialFunction::at(double r) const {
  const auto nodes = grid_.nodes();
  if (r < nodes.front() || r > nodes.back()) return 0.0;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  if (it == nodes.end()) return values_.back();
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double t = (r - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return values_[k] + t * (values_[k + 1] - values_[k]);
}

double RadialFunction::slope_at(double r) const {
  const auto nodes = grid_.nodes();
  if (r < nodes.front() || r >= nodes.back()) return 0.0;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return (values_[k + 1] - values_[k]) / (nodes[k + 1] - nodes[k]);
}

double RadialFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double RadialFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

bool RadialFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

RadialFunction RadialFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return RadialFunction(grid_, std::move(v), dirichlet_);
}

RadialFunction RadialFunction::abs() const {
  std::vector<double> v(values_);
  for (double& x : v) x = std::abs(x);
  return RadialFunction(grid_, std::move(v), dirichlet_);
}

RadialFunction RadialFunction::plus(const RadialFunction& other,
                                    double weight) const {
  require(other.size() == size(), "plus: grids differ in size");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += weight * other[i];
  return RadialFunction(grid_, std::move(v), dirichlet_ && other.dirichlet_);
}

double sphere_measure(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

std::vector<double> log_nodes(double a, double b, std::size_t cells) {
  require(a > 0.0 && b > a, "log_nodes needs 0 < a < b");
  std::vector<double> nodes(cells + 1);
  const double la = std::log(a);
  const double step = (std::log(b) - la) / static_cast<double>(cells);
  nodes.front() = a;
  for (std::size_t i = 1; i < cells; ++i) {
    nodes[i] = std::exp(la + step * static_cast<double>(i));
  }
  nodes.back() = b;
  return nodes;
}

RadialGrid make_grid(const AnnulusSpec& spec, std::size_t cells, Spacing spacing) {
  spec.validate();
  require(cells >= RadialGrid::kMinCells,
          "grid needs at least " + std::to_string(RadialGrid::kMinCells) +
              " cells, got " + std::to_string(cells));
  std::vector<double> nodes;
  if (spacing == Spacing::logarithmic) {
    nodes = log_nodes(spec.R1, spec.R2, cells);
  } else {
    nodes.resize(cells + 1);
    const double h = (spec.R2 - spec.R1) / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      nodes[i] = spec.R1 + h * static_cast<double>(i);
    }
    nodes.back() = spec.R2;
  }
  return RadialGrid(std::move(nodes), spec.exps, spacing);
}

double grad_norm_p(const RadialFunction& u) {
  const auto& g = u.grid();
  const auto r = g.nodes();
  const auto w = g.cell_weights();
  const double p = g.p();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    const double s = (u[k + 1] - u[k]) / (r[k + 1] - r[k]);
    if (s != 0.0) sum += std::pow(std::abs(s), p) * w[k];
  }
  return sphere_measure(g.dim()) * sum;
}

double lpstar_norm_pow(const RadialFunction& u) {
  const auto& g = u.grid();
  const auto w = g.node_weights();
  const double q = g.exps().critical();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != 0.0) sum += std::pow(std::abs(u[i]), q) * w[i];
  }
  return sphere_measure(g.dim()) * sum;
}

double energy_J(const RadialFunction& u) {
  const auto& e = u.grid().exps();
  return grad_norm_p(u) / e.p - lpstar_norm_pow(u) / e.critical();
}

double rayleigh_Q(const RadialFunction& u) {
  require(!u.is_zero(), "Rayleigh quotient of the zero function");
  const auto& e = u.grid().exps();
  return grad_norm_p(u) / std::pow(lpstar_norm_pow(u), e.p / e.critical());
}

WeakResidual weak_residual(const RadialFunction& u) {
  const auto& g = u.grid();
  const auto r = g.nodes();
  const auto cw = g.cell_weights();
  const auto nw = g.node_weights();
  const double p = g.p();
  const double q = g.exps().critical();
  const double omega = sphere_measure(g.dim());
  const std::size_t n = u.size();

  WeakResidual out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = r[k + 1] - r[k];
    const double flux = omega * signed_pow((u[k + 1] - u[k]) / h, p) * cw[k] / h;
    out.stiffness[k] -= flux;
    out.stiffness[k + 1] += flux;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.source[i] = omega * nw[i] * signed_pow(u[i], q);
  }
  return out;
}

RadialFunction gradient_J(const RadialFunction& u) {
  auto parts = weak_residual(u);
  std::vector<double> grad(u.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = parts.stiffness[i] - parts.source[i];
  }
  if (u.dirichlet()) {
    grad.front() = 0.0;
    grad.back() = 0.0;
  }
  return RadialFunction(u.grid(), std::move(grad), u.dirichlet());
}

std::vector<double> solve_stiffness(std::span<const double> c,
                                    std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  require(c.size() + 1 == n, "solve_stiffness: weight/rhs size mismatch");
  std::vector<double> x(n, 0.0);
  if (n < 3) return x;
  const std::size_t m = n - 2;
  std::vector<double> diag(m);
  std::vector<double> upper(m);
  std::vector<double> y(m);
  for (std::size_t j = 0; j < m; ++j) {
    diag[j] = c[j] + c[j + 1];
    upper[j] = -c[j + 1];
    y[j] = rhs[j + 1];
  }
  // Thomas algorithm on the symmetric tridiagonal system.
  for (std::size_t j = 1; j < m; ++j) {
    const double f = upper[j - 1] / diag[j - 1];
    diag[j] -= f * upper[j - 1];
    y[j] -= f * y[j - 1];
  }
  y[m - 1] /= diag[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) {
    y[j] = (y[j] - upper[j] * y[j + 1]) / diag[j];
  }
  std::copy(y.begin(), y.end(), x.begin() + 1);
  return x;
}

double dual_residual(const RadialGrid& grid, const WeakResidual& parts) {
  const auto r = grid.nodes();
  const auto w = grid.cell_weights();
  const double omega = sphere_measure(grid.dim());
  std::vector<double> c(grid.cells());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double h = r[k + 1] - r[k];
    c[k] = omega * w[k] / (h * h);
  }
  const std::size_t n = grid.size();
  std::vector<double> diff(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) diff[i] = parts.stiffness[i] - parts.source[i];
  auto dual_norm = [&](std::span<const double> f) {
    std::vector<double> g(f.begin(), f.end());
    g.front() = 0.0;
    g.back() = 0.0;
    const auto x = solve_stiffness(c, g);
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) s += g[i] * x[i];
    return std::sqrt(std::max(s, 0.0));
  };
  const double denom = dual_norm(parts.stiffness) + dual_norm(parts.source);
  return denom > 0.0 ? dual_norm(diff) / denom : 0.0;
}

double ode_residual(const RadialFunction& u) {
  return dual_residual(u.grid(), weak_residual(u));
}

RadialFunction extend_by_zero(const RadialFunction& u, const RadialGrid& target) {
  const std::size_t first = target.find_node(u.grid().inner());
  require(first != RadialGrid::npos,
          "extend_by_zero: inner radius is not a node of the target grid");
  require(first + u.size() <= target.size(),
          "extend_by_zero: source grid does not fit in the target grid");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u.grid().node(i);
    require(std::abs(target.node(first + i) - a) <= 1e-12 * a,
            "extend_by_zero: source nodes are not a contiguous run of target nodes");
  }
  if (first > 0 || first + u.size() < target.size()) {
    require(u[0] == 0.0 && u[u.size() - 1] == 0.0,
            "extend_by_zero: function must vanish where it meets the extension");
  }
  std::vector<double> v(target.size(), 0.0);
  std::copy(u.values().begin(), u.values().end(),
            v.begin() + static_cast<std::ptrdiff_t>(first));
  const bool dirichlet = v.front() == 0.0 && v.back() == 0.0;
  return RadialFunction(target, std::move(v), dirichlet);
}

RadialFunction restrict_to(const RadialFunction& u, std::size_t first,
                           std::size_t last) {
  require(first < last && last < u.size(), "restrict_to: bad node range");
  const auto r = u.grid().nodes();
  std::vector<double> nodes(r.begin() + static_cast<std::ptrdiff_t>(first),
                            r.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  std::vector<double> v(u.values().begin() + static_cast<std::ptrdiff_t>(first),
                        u.values().begin() + static_cast<std::ptrdiff_t>(last) + 1);
  v.front() = 0.0;
  v.back() = 0.0;
  RadialGrid g(std::move(nodes), u.grid().exps(), u.grid().spacing());
  return RadialFunction(std::move(g), std::move(v), true);
}

void write_csv(std::ostream& os, const RadialFunction& u) {
  os << "r,value\n";
  char buf[64];
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.grid().node(i), u[i]);
    os << buf;
  }
}

RadialFunction read_csv(std::istream& is, Exponents exps, bool dirichlet) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "r,value", "CSV header must be `r,value`, got `" + line + "`");
  std::vector<double> r;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, "malformed CSV row: " + line);
    try {
      r.push_back(std::stod(line.substr(0, comma)));
      v.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("malformed CSV row: " + line);
    }
  }
  require(r.size() >= 2, "CSV needs at least two rows");
  const double h0 = r[1] - r[0];
  bool uniform = true;
  for (std::size_t i = 2; i < r.size() && uniform; ++i) {
    uniform = std::abs((r[i] - r[i - 1]) - h0) <= 1e-9 * std::abs(h0);
  }
  RadialGrid g(std::move(r), exps, uniform ? Spacing::uniform : Spacing::logarithmic);
  return RadialFunction(std::move(g), std::move(v), dirichlet);
}

}  // namespace critlab
