#include "critlab/annulus.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <future>
#include <sstream>

#include "critlab/errors.hpp"
#include "critlab/sobolev.hpp"

namespace critlab {

namespace {

constexpr std::size_t kFlatSteps = 5;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-12;

// Regularised second derivative of (1/p)|s|^p used as the descent metric.
std::vector<double> metric_weights(const RadialFunction& u) {
  const auto& g = u.grid();
  const auto r = g.nodes();
  const auto w = g.cell_weights();
  const double p = g.p();
  const std::size_t cells = g.cells();
  std::vector<double> slope(cells);
  double smax = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    slope[k] = (u[k + 1] - u[k]) / (r[k + 1] - r[k]);
    smax = std::max(smax, std::abs(slope[k]));
  }
  const double floor2 = std::pow(1e-2 * std::max(smax, 1e-300), 2);
  const double omega = sphere_measure(g.dim());
  std::vector<double> c(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double h = r[k + 1] - r[k];
    const double psi = std::pow(slope[k] * slope[k] + floor2, 0.5 * (p - 2.0));
    c[k] = omega * (p - 1.0) * psi * w[k] / (h * h);
  }
  return c;
}

RadialFunction parabolic_bump(const RadialGrid& grid) {
  std::vector<double> v(grid.size());
  const double a = grid.inner();
  const double b = grid.outer();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (grid.node(i) - a) * (b - grid.node(i));
  }
  v.front() = 0.0;
  v.back() = 0.0;
  return RadialFunction(grid, std::move(v), true);
}

double nehari_level(double Q, const Exponents& e) {
  return std::pow(Q, e.dim / e.p) / e.dim;
}

}  // namespace

void SolveOptions::validate() const {
  require(max_iters >= 1, "max_iters must be >= 1");
  require(energy_tol > 0.0 && residual_tol > 0.0 && ode_tol > 0.0,
          "solver tolerances must be positive");
  require(shooting_cells >= kMinSolveCells,
          "shooting_cells must be >= " + std::to_string(kMinSolveCells));
  if (init == InitKind::custom) {
    require(custom_init.has_value(), "InitKind::custom needs custom_init");
  }
}

AnnulusSolution minimize_on_grid(const RadialGrid& grid, const SolveOptions& opts) {
  opts.validate();
  require(grid.inner() > 0.0, "annulus solves need an inner radius > 0");
  require(grid.cells() >= kMinSolveCells,
          "annulus solves need at least " + std::to_string(kMinSolveCells) + " cells");
  const auto& e = grid.exps();

  RadialFunction u = parabolic_bump(grid);
  if (opts.init == InitKind::custom) {
    const auto& c = *opts.custom_init;
    require(c.size() == grid.size(), "custom_init lives on a different grid");
    std::vector<double> v(c.values().begin(), c.values().end());
    v.front() = 0.0;
    v.back() = 0.0;
    u = RadialFunction(grid, std::move(v), true);
    require(!u.is_zero(), "custom_init is zero");
  }
  u = nehari_project(u.abs());

  EnergyReport rep;
  rep.method = Method::descent;
  double E = energy_J(u);
  rep.history.push_back(E);
  auto track_defect = [&](const RadialFunction& f, double J) {
    const double d = std::abs(J - nehari_level(rayleigh_Q(f), e)) / std::abs(J);
    rep.nehari_defect = std::max(rep.nehari_defect, d);
  };
  track_defect(u, E);

  std::size_t flat = 0;
  double tau = 1.0;
  bool stalled = false;
  double residual = 0.0;
  std::size_t it = 0;
  for (; it < opts.max_iters; ++it) {
    const auto parts = weak_residual(u);
    residual = dual_residual(u.grid(), parts);
    if (residual <= opts.residual_tol && flat >= kFlatSteps) break;

    std::vector<double> grad(u.size(), 0.0);
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
      grad[i] = parts.stiffness[i] - parts.source[i];
    }
    auto dir = solve_stiffness(metric_weights(u), grad);
    double slope = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      dir[i] = -dir[i];
      slope += grad[i] * dir[i];
    }
    if (!(slope < 0.0)) {
      stalled = true;
      break;
    }

    tau = std::min(1.0, 2.0 * tau);
    bool accepted = false;
    std::vector<double> trial(u.size());
    while (tau >= kMinStep) {
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i] = std::abs(u[i] + tau * dir[i]);
      }
      RadialFunction cand(grid, trial, true);
      if (!cand.is_zero()) {
        cand = nehari_project(cand);
        const double Et = energy_J(cand);
        if (Et <= E + kArmijo * tau * slope) {
          const double change = (E - Et) / std::abs(E);
          flat = (change <= opts.energy_tol) ? flat + 1 : 0;
          u = std::move(cand);
          E = Et;
          rep.history.push_back(E);
          track_defect(u, E);
          accepted = true;
          break;
        }
      }
      tau *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  residual = ode_residual(u);
  rep.iterations = it;
  rep.residual = residual;
  rep.level = E;
  rep.Q = rayleigh_Q(u);
  rep.converged = residual <= opts.residual_tol && (flat >= kFlatSteps || stalled);
  return AnnulusSolution{std::move(u), std::move(rep)};
}

AnnulusSolution minimize_annulus(const AnnulusSpec& spec, std::size_t cells,
                                 const SolveOptions& opts) {
  spec.validate();
  require(cells >= kMinSolveCells,
          "annulus solves need at least " + std::to_string(kMinSolveCells) + " cells");
  return minimize_on_grid(make_grid(spec, cells, Spacing::logarithmic), opts);
}

namespace {

using State = std::array<double, 4>;  // u, flux w, int |u'|^p r^{N-1}, int |u|^{p*} r^{N-1}

struct RadialFlux {
  int dim;
  double p;
  double q;

  void operator()(const State& y, State& dy, double r) const {
    const double rn = std::pow(r, dim - 1);
    const double du = signed_pow(y[1] / rn, p / (p - 1.0));
    dy[0] = du;
    dy[1] = -rn * signed_pow(y[0], q);
    dy[2] = rn * std::pow(std::abs(du), p);
    dy[3] = rn * std::pow(std::abs(y[0]), q);
  }
};

struct ShotOutcome {
  double value;   // signed miss, positive when the slope is too small
  double u_end;   // u(R2)
  double u_max;
};

class Shooter {
 public:
  Shooter(const AnnulusSpec& spec, double tol)
      : spec_(spec), rhs_{spec.exps.dim, spec.exps.p, spec.exps.critical()}, tol_(tol) {}

  [[nodiscard]] State initial(double slope) const {
    return State{0.0, std::pow(spec_.R1, spec_.exps.dim - 1) *
                          std::pow(slope, spec_.exps.p - 1.0),
                 0.0, 0.0};
  }

  [[nodiscard]] ShotOutcome shoot(double slope) const {
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(tol_, tol_, ode::runge_kutta_dopri5<State>());
    const double R1 = spec_.R1;
    const double R2 = spec_.R2;
    stepper.initialize(initial(slope), R1, 1e-4 * (R2 - R1));
    double umax = 0.0;
    double first_zero = -1.0;
    double u_prev = 0.0;
    while (stepper.current_time() < R2) {
      const auto [t0, t1] = stepper.do_step(rhs_);
      State y;
      const double t = std::min(t1, R2);
      if (t1 > R2) {
        stepper.calc_state(R2, y);
      } else {
        y = stepper.current_state();
      }
      if (first_zero < 0.0 && u_prev > 0.0 && y[0] <= 0.0 && t < R2) {
        // Locate the crossing inside [t0, t] on the dense output.
        double a = t0;
        double b = t;
        State ym;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (a + b);
          stepper.calc_state(mid, ym);
          (ym[0] > 0.0 ? a : b) = mid;
        }
        first_zero = 0.5 * (a + b);
      }
      umax = std::max(umax, y[0]);
      u_prev = y[0];
      if (t1 >= R2) {
        ShotOutcome out{0.0, y[0], umax};
        if (first_zero < 0.0 || y[0] < 0.0) {
          out.value = y[0] / umax;
        } else {
          out.value = -(R2 - first_zero) / (R2 - R1);
        }
        return out;
      }
    }
    return ShotOutcome{0.0, 0.0, umax};
  }

  // Samples the solution at `nodes` and returns the two energy integrals.
  std::pair<std::vector<double>, State> sample(double slope,
                                               std::span<const double> nodes) const {
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(tol_, tol_, ode::runge_kutta_dopri5<State>());
    std::vector<double> values;
    values.reserve(nodes.size());
    State last{};
    State y0 = initial(slope);
    ode::integrate_times(stepper, rhs_, y0, nodes.begin(), nodes.end(),
                         1e-4 * (spec_.R2 - spec_.R1),
                         [&](const State& y, double) {
                           values.push_back(y[0]);
                           last = y;
                         });
    return {std::move(values), last};
  }

 private:
  AnnulusSpec spec_;
  RadialFlux rhs_;
  double tol_;
};

}  // namespace

AnnulusSolution shoot_annulus(const AnnulusSpec& spec, const SolveOptions& opts) {
  spec.validate();
  opts.validate();
  const Shooter shooter(spec, opts.ode_tol);
  const auto& e = spec.exps;

  // Natural slope scale of the annulus width L is L^{-N/p}.
  double lo = std::pow(spec.R2 - spec.R1, -e.dim / e.p);
  double hi = lo;
  double flo = shooter.shoot(lo).value;
  double fhi = flo;
  constexpr int kMaxExpand = 200;
  int steps = 0;
  if (flo < 0.0) {
    while (flo < 0.0 && steps++ < kMaxExpand) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = shooter.shoot(lo).value;
    }
  } else {
    while (fhi > 0.0 && steps++ < kMaxExpand) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = shooter.shoot(hi).value;
    }
  }
  if (!(flo >= 0.0 && fhi <= 0.0)) {
    std::ostringstream msg;
    msg << "shoot_annulus: no sign change in shooting bracket [" << lo << ", " << hi
        << "], misses [" << flo << ", " << fhi << "]";
    throw NumericError(msg.str());
  }

  // Bisection to a 1e-3 bracket, then safeguarded secant.
  std::size_t iters = 0;
  double s = 0.5 * (lo + hi);
  while (hi - lo > 1e-3 * hi && iters < 200) {
    s = 0.5 * (lo + hi);
    const double f = shooter.shoot(s).value;
    ++iters;
    if (f == 0.0) {
      lo = hi = s;
      break;
    }
    (f > 0.0 ? lo : hi) = s;
    (f > 0.0 ? flo : fhi) = f;
  }
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi && iters < 400) {
    double next = hi - fhi * (hi - lo) / (fhi - flo);
    const double margin = 0.01 * (hi - lo);
    if (!(next > lo + margin && next < hi - margin)) next = 0.5 * (lo + hi);
    const double f = shooter.shoot(next).value;
    ++iters;
    s = next;
    if (f == 0.0) break;
    if (f > 0.0) {
      lo = next;
      flo = f;
    } else {
      hi = next;
      fhi = f;
    }
    if (std::abs(f) < 1e-15) break;
  }
  s = (lo == hi) ? lo : s;

  const auto grid = make_grid(spec, opts.shooting_cells, Spacing::logarithmic);
  auto [values, last] = shooter.sample(s, grid.nodes());
  require(values.size() == grid.size(), "shoot_annulus: sampling failed");
  const double umax = *std::max_element(values.begin(), values.end());
  const double boundary_miss = std::abs(values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (!(values[i] > 0.0)) {
      std::ostringstream msg;
      msg << "shoot_annulus: solution for slope " << s
          << " is not positive inside the annulus (node " << i << ")";
      throw NumericError(msg.str());
    }
  }
  values.front() = 0.0;
  values.back() = 0.0;
  RadialFunction profile(grid, std::move(values), true);

  const double omega = sphere_measure(e.dim);
  const double a = omega * last[2];
  const double b = omega * last[3];
  EnergyReport rep;
  rep.method = Method::shooting;
  rep.Q = a / std::pow(b, e.p / e.critical());
  rep.level = nehari_level(rep.Q, e);
  rep.iterations = iters;
  rep.residual = ode_residual(profile);
  rep.shooting_slope = s;
  rep.converged = rep.residual <= opts.residual_tol && boundary_miss <= 1e-10 * umax;
  return AnnulusSolution{std::move(profile), std::move(rep)};
}

double annulus_level(const AnnulusSpec& spec, std::size_t cells, const SolveOptions& opts) {
  const auto sol = minimize_annulus(spec, cells, opts);
  if (!sol.report.converged) {
    std::ostringstream msg;
    msg << "descent did not converge on (" << spec.R1 << ", " << spec.R2
        << ") after " << sol.report.iterations << " iterations, residual "
        << sol.report.residual;
    throw NonConvergenceError(msg.str());
  }
  return sol.report.level;
}

double scaling_check(const AnnulusSpec& spec, std::size_t cells, const SolveOptions& opts) {
  spec.validate();
  AnnulusSpec unit = spec;
  unit.R1 = spec.R1 / spec.R2;
  unit.R2 = 1.0;
  const double direct = annulus_level(spec, cells, opts);
  const double scaled = annulus_level(unit, cells, opts);
  return std::abs(direct - scaled) / scaled;
}

std::vector<CurveRow> c_curve(Exponents exps, std::vector<double> radii, double c_infty,
                              std::size_t cells, const SolveOptions& opts) {
  for (double R : radii) require(R > 0.0 && R < 1.0, "c_curve radii must lie in (0, 1)");
  std::sort(radii.begin(), radii.end(), std::greater<>());
  std::vector<std::future<AnnulusSolution>> jobs;
  jobs.reserve(radii.size());
  for (double R : radii) {
    jobs.push_back(std::async(std::launch::async, [=, &opts] {
      return minimize_annulus(AnnulusSpec{R, 1.0, exps}, cells, opts);
    }));
  }
  std::vector<CurveRow> rows;
  rows.reserve(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto sol = jobs[i].get();
    rows.push_back(CurveRow{radii[i], sol.report.level, sol.report.level - c_infty,
                            sol.report.converged});
  }
  return rows;
}

}  // namespace critlab
