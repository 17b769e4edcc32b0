#include "critlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "critlab/annulus.hpp"
#include "critlab/bubbles.hpp"
#include "critlab/calibration.hpp"
#include "critlab/radial.hpp"
#include "critlab/sobolev.hpp"
#include "critlab/symmetry.hpp"

namespace critlab {

namespace {

std::string printf_string(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list copy;
  va_copy(copy, ap);
  const int n = std::vsnprintf(nullptr, 0, fmt, copy);
  va_end(copy);
  std::string out(static_cast<std::size_t>(std::max(n, 0)), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, ap);
  va_end(ap);
  return out;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

const std::vector<Exponents> kCases{{3, 2.0}, {4, 2.0}, {4, 3.0}};

// Classical best constant from the Gamma-function formula, coded separately
// from the numerical pipeline.
double classical_S(int N, double p) {
  const double n = N;
  const double g = std::tgamma(1.0 + n / 2.0) * std::tgamma(n) /
                   (std::tgamma(n / p) * std::tgamma(1.0 + n - n / p));
  const double C = std::pow(std::numbers::pi, -0.5) * std::pow(n, -1.0 / p) *
                   std::pow((p - 1.0) / (n - p), 1.0 - 1.0 / p) * std::pow(g, 1.0 / n);
  return std::pow(C, -p);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome nehari_identity(const AcceptanceOptions& opts) {
  const std::vector<std::pair<double, double>> annuli{{0.5, 1.0}, {0.1, 1.0}, {1.0, 3.0}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& e : kCases) {
    for (const auto& [R1, R2] : annuli) {
      const auto grid = make_grid(AnnulusSpec{R1, R2, e}, 200);
      for (int s = 0; s < 100; ++s) {
        std::vector<double> v(grid.size(), 0.0);
        for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = val(rng);
        const RadialFunction u(grid, v, true);
        const double J = energy_J(nehari_project(u));
        const double pred = std::pow(rayleigh_Q(u), e.dim / e.p) / e.dim;
        worst = std::max(worst, rel(J, pred));
        ++count;
      }
    }
  }
  return {worst <= 1e-10, printf_string("%zu functions, max |J(Pu) - Q^{N/p}/N|/J = %.3g (limit 1e-10)", count, worst)};
}

Outcome dilation_invariance(const AcceptanceOptions&) {
  double worst = 0.0;
  for (const auto& e : kCases) {
    const auto grid = make_grid(AnnulusSpec{0.1, 1.0, e}, 512);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = std::log(grid.node(i) / 0.1) / std::log(10.0);
      v[i] = std::sin(std::numbers::pi * t) * (1.0 + 0.3 * t);
    }
    v.front() = 0.0;
    v.back() = 0.0;
    const RadialFunction u(grid, v, true);
    const double J = energy_J(u);
    for (double lambda : {0.1, 3.0, 10.0}) worst = std::max(worst, rel(energy_J(dilate(u, lambda)), J));
  }
  return {worst <= 1e-12, printf_string("max |J(u_l) - J(u)|/J = %.3g over l in {0.1, 3, 10} (limit 1e-12)", worst)};
}

Outcome sobolev_check(const AcceptanceOptions&) {
  const double exact = classical_S(3, 2.0);
  const auto r1 = sobolev_constant(3, 2.0, 0.0, 1024);
  const auto r2 = sobolev_constant(3, 2.0, 0.0, 2048);
  // Three significant digits: within half a unit of the third digit.
  const double unit = std::pow(10.0, std::floor(std::log10(exact)) - 2.0);
  const bool digits = std::abs(r2.S - exact) <= 0.5 * unit;
  const double self = std::abs(r2.S - r1.S) / r2.S;
  return {digits && self <= 1e-3,
          printf_string("S(3,2) = %.7f vs classical %.7f (|diff| %.2g, half-unit %.2g); |S(2048)-S(1024)|/S = %.3g (limit 1e-3)",
                        r2.S, exact, std::abs(r2.S - exact), 0.5 * unit, self)};
}

Outcome scaling_identity(const AcceptanceOptions&) {
  double worst = 0.0;
  for (const auto& e : kCases) worst = std::max(worst, scaling_check(AnnulusSpec{0.2, 2.0, e}, kDefaultLevelCells));
  return {worst <= 1e-6, printf_string("max |c(0.2,2) - c(0.1,1)|/c = %.3g over 3 (N,p) (limit 1e-6)", worst)};
}

Outcome small_hole(const AcceptanceOptions&) {
  const Exponents e{4, 2.0};
  const double c_inf = sobolev_constant(4, 2.0).c_infty;
  const double tol = 1e-4 * c_inf;
  const auto rows = c_curve(e, {0.5, 0.2, 0.1, 0.05, 0.01}, c_inf, kDefaultLevelCells);
  bool monotone = true;
  bool above = true;
  bool converged = true;
  std::string levels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].level > rows[i - 1].level) monotone = false;
    if (rows[i].level < c_inf - 2.0 * tol) above = false;
    converged = converged && rows[i].converged;
    levels += printf_string("%sc(%g)=%.6g", i ? ", " : "", rows[i].R, rows[i].level);
  }
  const double last = rows.back().level / c_inf;
  const bool limit = last <= 1.05;
  return {monotone && above && converged && limit,
          printf_string("%s; c_inf=%.6g; nonincreasing=%s, >=c_inf-2tol=%s, c(0.01,1)/c_inf=%.5f (limit 1.05)",
                        levels.c_str(), c_inf, monotone ? "yes" : "no", above ? "yes" : "no", last)};
}

Outcome cross_solver(const AcceptanceOptions&) {
  double worst = 0.0;
  bool ok = true;
  for (const auto& e : kCases) {
    for (double ratio : {0.5, 0.1}) {
      const AnnulusSpec spec{ratio, 1.0, e};
      const auto d = minimize_annulus(spec, kDefaultLevelCells);
      const auto s = shoot_annulus(spec);
      ok = ok && d.report.converged && s.report.converged;
      worst = std::max(worst, rel(d.report.level, s.report.level));
    }
  }
  return {ok && worst <= 1e-4, printf_string("max |descent - shooting|/level = %.3g over 6 instances (limit 1e-4), all converged: %s",
                                             worst, ok ? "yes" : "no")};
}

CalibratedFamily reference_family() {
  return build_family(AnnulusSpec{0.125, 1.0, {4, 2.0}}, 3, kDefaultLevelCells);
}

Outcome calibration_check(const AcceptanceOptions&) {
  const auto fam = reference_family();
  double pair = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) pair = std::max(pair, rel(fam.levels[i], fam.levels[j]));
  }
  const AnnulusSpec half{0.5, 1.0, {4, 2.0}};
  const double by_descent = annulus_level(half, kDefaultLevelCells);
  const auto shot = shoot_annulus(half);
  const double d1 = rel(fam.common_level, by_descent);
  const double d2 = rel(fam.common_level, shot.report.level);
  return {pair <= 1e-6 && d1 <= 1e-4 && d2 <= 1e-4 && shot.report.converged,
          printf_string("pairwise %.3g (limit 1e-6); common %.10g vs c(0.5,1) descent %.10g (%.2g), shooting %.10g (%.2g) (limit 1e-4)",
                        pair, fam.common_level, by_descent, d1, shot.report.level, d2)};
}

Outcome span_bound(const AcceptanceOptions& opts) {
  const auto fam = reference_family();
  const auto chk = span_energy_check(fam, 1, 10000, opts.seed);
  const double limit = 2.0 * fam.common_level + 1e-12;
  return {chk.max_sampled <= limit,
          printf_string("max J over 1e4 samples of span(w1,w2) = %.12g, limit 2*common+1e-12 = %.12g", chk.max_sampled, limit)};
}

Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ();
}

// Block-diagonal generators on one random partition (plane rotations by 2 pi
// j / k and coordinate reflections), conjugated by a random orthogonal matrix.
GroupSpec random_group(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> order(2, 6);
  std::vector<std::pair<int, int>> blocks;  // (start, size)
  for (int i = 0; i < n;) {
    const int size = (i + 1 < n && coin(rng)) ? 2 : 1;
    blocks.emplace_back(i, size);
    i += size;
  }
  const Matrix Q = random_orthogonal(n, rng);
  const int gens = 1 + coin(rng);
  GroupSpec spec{n, {}};
  for (int k = 0; k < gens; ++k) {
    Matrix D = Matrix::Identity(n, n);
    for (auto [start, size] : blocks) {
      const int choice = std::uniform_int_distribution<int>(0, 2)(rng);
      if (choice == 0) continue;  // identity on this block
      if (size == 1) {
        D(start, start) = -1.0;
      } else {
        const int m = order(rng);
        const int j = std::uniform_int_distribution<int>(1, m - 1)(rng);
        D.block(start, start, 2, 2) = plane_rotation(2, 0, 1, 2.0 * std::numbers::pi * j / m);
      }
    }
    spec.generators.push_back(Q * D * Q.transpose());
  }
  return spec;
}

Outcome orbit_arithmetic(const AcceptanceOptions& opts) {
  const auto pm = close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}});
  const auto l_pm = min_orbit_card(pm, opts.seed).l.value_or(0);
  const double a = 2.0 * std::numbers::pi / 3.0;
  const auto blocks = close_group(GroupSpec{4, {plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a)}});
  const auto l_blocks = min_orbit_card(blocks, opts.seed).l.value_or(0);

  std::mt19937_64 rng(opts.seed + 17);
  int agree = 0;
  int with_fix = 0;
  std::size_t points = 0;
  std::size_t divides = 0;
  bool all_complete = true;
  for (int s = 0; s < 20; ++s) {
    const int n = 2 + s % 3;
    const auto closure = close_group(random_group(n, rng));
    all_complete = all_complete && closure.complete;
    const auto rep = min_orbit_card(closure, opts.seed + static_cast<std::uint64_t>(s));
    const bool fix = rep.fix_dim >= 1;
    with_fix += fix ? 1 : 0;
    if (rep.l && ((*rep.l == 1) == fix) && closure.order() % *rep.l == 0) ++agree;
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = g(rng);
      ++points;
      if (closure.order() % orbit_size(closure, x) == 0) ++divides;
    }
  }
  const bool ok = l_pm == 2 && l_blocks == 3 && agree == 20 && divides == points && all_complete;
  return {ok, printf_string("l({+-I}) = %zu, l(double 2pi/3) = %zu, l=1 <=> Fix!={0} on %d/20 random groups (%d with Fix), orbit | order on %zu/%zu points",
                            l_pm, l_blocks, agree, with_fix, divides, points)};
}

Outcome bubble_additivity(const AcceptanceOptions& opts) {
  const int N = 4;
  const double p = 2.0;
  const auto U = calibrate_talenti(N, p);
  const auto trivial = close_group(GroupSpec{N, {Matrix::Identity(N, N)}});
  const MCParams mc{opts.mc_samples, opts.seed};
  std::vector<double> dev;
  for (double d : {10.0, 100.0, 1000.0}) {
    Vector far = Vector::Zero(N);
    far(0) = d;
    BubbleConfig two{N, {}, {{TalentiBubble{Vector::Zero(N), 1.0, U, 1.0}, trivial}, {TalentiBubble{far, 1.0, U, 1.0}, trivial}}};
    dev.push_back(additivity_check(two, mc).deviation());
  }
  const bool decreasing = dev[0] > dev[1] && dev[1] > dev[2];
  const auto pm = close_group(GroupSpec{N, {-Matrix::Identity(N, N)}});
  Vector y = Vector::Zero(N);
  y(0) = 10.0;
  BubbleConfig orb{N, {}, {{TalentiBubble{y, 0.1, U, 1.0}, pm}}};
  const auto rep = additivity_check(orb, mc);
  const bool factor = rep.placement.multiplicity[0] == 2 && rep.deviation() <= 0.02;
  return {decreasing && factor,
          printf_string("(N,p)=(4,2): deviations %.3g, %.3g, %.3g at d = 10, 100, 1000 (strictly decreasing: %s); "
                        "{+-I} orbit at separation/scale %.0f: |orbit| = %zu, deviation %.3g (limit 0.02)",
                        dev[0], dev[1], dev[2], decreasing ? "yes" : "no", rep.placement.separation_ratio,
                        rep.placement.multiplicity[0], rep.deviation())};
}

Outcome energy_quantum(const AcceptanceOptions&) {
  bool ok = true;
  std::string detail;
  for (const auto& e : kCases) {
    const auto U = calibrate_talenti(e.dim, e.p);
    const auto q = energy_quantum_check(U);
    const double close = rel(q.phi, q.c_infty);
    double worst = std::numeric_limits<double>::infinity();
    for (double fb : {0.5, 0.8, 1.25, 2.0}) {
      for (double fa : {0.5, 1.0, 2.0}) {
        TalentiProfile v{U.alpha * fa, U.beta * fb, e};
        worst = std::min(worst, talenti_nehari_phi_infty(v) - (q.c_infty - q.tolerance));
      }
    }
    const bool here = close <= 0.01 && worst >= 0.0 && q.two_cap_ok;
    ok = ok && here;
    detail += printf_string("%s(%d,%g): |phi-c_inf|/c_inf=%.2g, min projected margin=%.3g, two-cap/2c_inf=%.4f",
                            detail.empty() ? "" : "; ", e.dim, e.p, close, worst, q.two_cap_level / (2.0 * q.c_infty));
  }
  return {ok, detail};
}

struct Entry {
  const char* name;
  double budget;
  std::function<Outcome(const AcceptanceOptions&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> table{
      {"nehari-identity", 5.0, nehari_identity},
      {"dilation-invariance", 1.0, dilation_invariance},
      {"sobolev-constant", 30.0, sobolev_check},
      {"scaling-identity", 120.0, scaling_identity},
      {"small-hole-limit", 600.0, small_hole},
      {"cross-solver", 600.0, cross_solver},
      {"calibrated-family", 300.0, calibration_check},
      {"span-bound", 60.0, span_bound},
      {"orbit-arithmetic", 10.0, orbit_arithmetic},
      {"bubble-additivity", 900.0, bubble_additivity},
      {"energy-quantum", 120.0, energy_quantum},
  };
  return table;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  if (id < 1 || id > kCriterionCount) throw std::out_of_range("run_criterion: id must be in 1.." + std::to_string(kCriterionCount));
  const auto& entry = registry()[static_cast<std::size_t>(id - 1)];
  CriterionResult r;
  r.id = id;
  r.name = entry.name;
  r.budget_seconds = entry.budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto out = entry.run(opts);
    r.passed = out.passed;
    r.detail = out.detail;
  } catch (const std::exception& ex) {
    r.passed = false;
    r.detail = std::string("exception: ") + ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += printf_string(" [over time budget: %.1f s > %.0f s]", r.seconds, r.budget_seconds);
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return printf_string("[%s] %2d %-20s (%.2f s / %.0f s) %s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                       r.seconds, r.budget_seconds, r.detail.c_str());
}

}  // namespace critlab
