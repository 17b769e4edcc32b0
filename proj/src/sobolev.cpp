#include "critlab/sobolev.hpp"

#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <sstream>

#include "critlab/errors.hpp"

namespace critlab {

double TalentiProfile::transition_radius() const {
  return std::pow(alpha / beta, (exps.p - 1.0) / exps.p);
}

double talenti_eval(const TalentiProfile& profile, double r) {
  require(r >= 0.0, "talenti_eval: negative radius");
  const double p = profile.exps.p;
  const double x = profile.alpha + profile.beta * std::pow(r, p / (p - 1.0));
  return std::pow(x, 1.0 - profile.exps.dim / p);
}

double talenti_slope(const TalentiProfile& profile, double r) {
  require(r >= 0.0, "talenti_slope: negative radius");
  if (r == 0.0) return 0.0;
  const double p = profile.exps.p;
  const double pp = p / (p - 1.0);
  const double x = profile.alpha + profile.beta * std::pow(r, pp);
  const double e = 1.0 - profile.exps.dim / p;
  return e * std::pow(x, e - 1.0) * profile.beta * pp * std::pow(r, pp - 1.0);
}

RadialFunction sample_profile(const TalentiProfile& profile, const RadialGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = talenti_eval(profile, grid.node(i));
  return RadialFunction(grid, std::move(v), false);
}

RadialGrid talenti_residual_grid(int dim, double p, double alpha) {
  Exponents e{dim, p};
  return RadialGrid(log_nodes(1e-3 * alpha, 1e3 * alpha, kResidualCells), e);
}

double talenti_signed_residual(int dim, double p, double alpha, double beta) {
  const TalentiProfile prof{alpha, beta, Exponents{dim, p}};
  const auto u = sample_profile(prof, talenti_residual_grid(dim, p, alpha));
  const auto parts = weak_residual(u);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    num += parts.stiffness[i] - parts.source[i];
    den += std::abs(parts.stiffness[i]) + std::abs(parts.source[i]);
  }
  return num / den;
}

TalentiProfile calibrate_talenti(int dim, double p, double alpha) {
  Exponents e{dim, p};
  e.validate();
  require(alpha > 0.0, "calibrate_talenti: alpha must be positive");

  auto f = [&](double beta) { return talenti_signed_residual(dim, p, alpha, beta); };

  // The residual is positive for beta above the root; walk out from beta = 1
  // in factors of 2 until the sign flips.
  double lo = 1.0;
  double hi = 1.0;
  double flo = f(lo);
  double fhi = flo;
  int steps = 0;
  constexpr int kMaxSteps = 200;
  if (flo > 0.0) {
    while (flo > 0.0 && steps++ < kMaxSteps) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = f(lo);
    }
  } else {
    while (fhi < 0.0 && steps++ < kMaxSteps) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = f(hi);
    }
  }
  if (!(flo <= 0.0 && fhi >= 0.0)) {
    std::ostringstream msg;
    msg << "calibrate_talenti: no sign change for N=" << dim << " p=" << p
        << " alpha=" << alpha << "; last bracket [" << lo << ", " << hi
        << "] residuals [" << flo << ", " << fhi << "]";
    throw NumericError(msg.str());
  }
  if (flo == 0.0) return TalentiProfile{alpha, lo, e};
  if (fhi == 0.0) return TalentiProfile{alpha, hi, e};

  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 200) {
    std::ostringstream msg;
    msg << "calibrate_talenti: root find did not converge, bracket [" << a << ", "
        << b << "]";
    throw NumericError(msg.str());
  }
  return TalentiProfile{alpha, 0.5 * (a + b), e};
}

double default_truncation(int dim, double p) {
  return std::max(1e4, std::pow(10.0, 4.0 * (p - 1.0) / (dim - p)));
}

SobolevReport sobolev_constant(int dim, double p, double truncation_radius,
                               std::size_t cells) {
  if (truncation_radius <= 0.0) truncation_radius = default_truncation(dim, p);
  require(truncation_radius >= 1e3, "sobolev_constant: truncation radius must be >= 1e3");
  require(cells >= 512, "sobolev_constant: need at least 512 cells");
  const auto prof = calibrate_talenti(dim, p, 1.0);
  const double T = truncation_radius;
  RadialGrid grid(log_nodes(1.0 / T, T, cells), prof.exps);
  std::vector<double> v(grid.size());
  const double taper_start = 0.1 * T;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = grid.node(i);
    double taper = 1.0;
    if (r > taper_start) taper = (T - r) / (T - taper_start);
    v[i] = talenti_eval(prof, r) * taper;
  }
  v.back() = 0.0;
  RadialFunction u(grid, std::move(v), false);

  SobolevReport rep;
  rep.S = rayleigh_Q(u);
  rep.c_infty = std::pow(rep.S, dim / p) / dim;
  rep.truncation_radius = T;
  rep.grid_size = cells;
  rep.exps = prof.exps;
  return rep;
}

double nehari_scale(double a, double b, double p, double p_star) {
  require(a > 0.0 && b > 0.0, "nehari_scale: both integrals must be positive");
  return std::pow(a / b, 1.0 / (p_star - p));
}

RadialFunction nehari_project(const RadialFunction& u) {
  require(!u.is_zero(), "nehari_project: zero function");
  const auto& e = u.grid().exps();
  const double t = nehari_scale(grad_norm_p(u), lpstar_norm_pow(u), e.p, e.critical());
  return u.scaled(t);
}

RadialFunction dilate(const RadialFunction& u, double lambda) {
  require(lambda > 0.0, "dilate: lambda must be positive");
  const auto& g = u.grid();
  std::vector<double> nodes(g.nodes().begin(), g.nodes().end());
  for (double& r : nodes) r *= lambda;
  const double amp = std::pow(lambda, (g.p() - g.dim()) / g.p());
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x *= amp;
  return RadialFunction(RadialGrid(std::move(nodes), g.exps(), g.spacing()),
                        std::move(v), u.dirichlet());
}

}  // namespace critlab
