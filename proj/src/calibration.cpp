#include "critlab/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "critlab/errors.hpp"
#include "critlab/sobolev.hpp"

namespace critlab {

std::vector<double> partition_radii(double R1, double R2, std::size_t m) {
  require(m >= 1, "partition_radii: m must be >= 1");
  require(R1 > 0.0 && R2 > R1, "partition_radii: need 0 < R1 < R2");
  const double C = std::pow(R1 / R2, 1.0 / static_cast<double>(m));
  std::vector<double> radii(m + 1);
  radii.front() = R2;
  for (std::size_t i = 1; i < m; ++i) radii[i] = R2 * std::pow(C, static_cast<double>(i));
  radii.back() = R1;
  return radii;
}

namespace {

RadialGrid partition_grid(const std::vector<double>& radii, std::size_t cells,
                          const Exponents& exps) {
  std::vector<double> nodes;
  nodes.reserve((radii.size() - 1) * cells + 1);
  for (std::size_t i = radii.size() - 1; i > 0; --i) {
    auto piece = log_nodes(radii[i], radii[i - 1], cells);
    nodes.insert(nodes.end(), piece.begin() + (nodes.empty() ? 0 : 1), piece.end());
  }
  return RadialGrid(std::move(nodes), exps, Spacing::logarithmic);
}

}  // namespace

CalibratedFamily build_family(const AnnulusSpec& spec, std::size_t m,
                              std::size_t cells_per_piece, const SolveOptions& opts) {
  spec.validate();
  require(m >= 1, "build_family: m must be >= 1");
  auto radii = partition_radii(spec.R1, spec.R2, m);
  auto grid = partition_grid(radii, cells_per_piece, spec.exps);

  std::vector<std::future<AnnulusSolution>> jobs;
  jobs.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) {
    const double lo = radii[i];
    const double hi = radii[i - 1];
    jobs.push_back(std::async(std::launch::async, [&, lo, hi] {
      RadialGrid sub(log_nodes(lo, hi, cells_per_piece), spec.exps, Spacing::logarithmic);
      return minimize_on_grid(sub, opts);
    }));
  }

  CalibratedFamily fam{spec, radii, grid, {}, {}, 0.0, cells_per_piece};
  for (std::size_t i = 0; i < m; ++i) {
    auto sol = jobs[i].get();
    if (!sol.report.converged) {
      std::ostringstream msg;
      msg << "build_family: piece " << i + 1 << " on [" << radii[i + 1] << ", "
          << radii[i] << "] did not converge (residual " << sol.report.residual << ")";
      throw NonConvergenceError(msg.str());
    }
    fam.omegas.push_back(extend_by_zero(sol.profile, grid));
    fam.levels.push_back(energy_J(fam.omegas.back()));
  }
  double sum = 0.0;
  for (double l : fam.levels) sum += l;
  fam.common_level = sum / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dev = std::abs(fam.levels[i] - fam.common_level) / fam.common_level;
    if (dev > kFamilyLevelTolerance) {
      std::ostringstream msg;
      msg << "build_family: piece " << i + 1 << " level " << fam.levels[i]
          << " deviates " << dev << " from the common level " << fam.common_level;
      throw NumericError(msg.str());
    }
  }
  return fam;
}

RadialFunction sign_changing_candidate(const CalibratedFamily& family) {
  require(!family.omegas.empty(), "sign_changing_candidate: empty family");
  RadialFunction out = RadialFunction::zero(family.grid, true);
  for (std::size_t i = 0; i < family.omegas.size(); ++i) {
    // omegas[0] is omega_1, which enters with sign (-1)^1.
    out = out.plus(family.omegas[i], (i % 2 == 0) ? -1.0 : 1.0);
  }
  return out;
}

double span_energy_bound(const CalibratedFamily& family, std::size_t k) {
  require(k >= 1 && k + 1 <= family.size(),
          "span_energy_bound: k must lie in [1, m - 1], got k = " + std::to_string(k) +
              " with m = " + std::to_string(family.size()));
  const auto& e = family.spec.exps;
  double bound = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    bound += std::pow(rayleigh_Q(family.omegas[i]), e.dim / e.p) / e.dim;
  }
  return bound;
}

SpanCheck span_energy_check(const CalibratedFamily& family, std::size_t k,
                            std::size_t samples, std::uint64_t seed) {
  SpanCheck out;
  out.bound = span_energy_bound(family, k);
  out.samples = samples;
  out.max_sampled = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::vector<double> v(family.grid.size());
  for (std::size_t s = 0; s < samples; ++s) {
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      const double c = coef(rng);
      const auto w = family.omegas[i].values();
      for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * w[j];
    }
    const double J = energy_J(RadialFunction(family.grid, v, true));
    out.max_sampled = std::max(out.max_sampled, J);
  }
  return out;
}

double resolve_c_infty(Exponents exps, const ThresholdOptions& opts) {
  if (opts.c_infty > 0.0) return opts.c_infty;
  return sobolev_constant(exps.dim, exps.p).c_infty;
}

SmallHoleThreshold threshold_small_hole(double delta, Exponents exps,
                                        const ThresholdOptions& opts) {
  require(delta > 0.0, "threshold_small_hole: delta must be positive");
  require(opts.R_min > 0.0 && opts.R_max < 1.0 && opts.R_min < opts.R_max,
          "threshold_small_hole: need 0 < R_min < R_max < 1");
  SmallHoleThreshold out;
  out.c_infty = resolve_c_infty(exps, opts);
  out.tolerance = opts.level_tolerance * out.c_infty;
  const double target = out.c_infty + delta;
  auto level = [&](double R) {
    return annulus_level(AnnulusSpec{R, 1.0, exps}, opts.cells, opts.solve);
  };

  if (delta <= 2.0 * out.tolerance) {
    out.note = "delta is below twice the level tolerance; grid accuracy cannot certify";
    return out;
  }
  const double c_hi = level(opts.R_max);
  if (c_hi <= target) {
    out.R_delta = opts.R_max;
    out.level = c_hi;
    out.conclusive = true;
    out.note = "condition holds on the whole search range; R_delta >= R_max";
    return out;
  }
  const double c_lo = level(opts.R_min);
  if (c_lo > target) {
    out.R_delta = opts.R_min;
    out.level = c_lo;
    out.note = "condition fails already at R_min; R_delta < R_min";
    return out;
  }
  double lo = std::log(opts.R_min);
  double hi = std::log(opts.R_max);
  double level_lo = c_lo;
  for (std::size_t i = 0; i < opts.bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double c = level(std::exp(mid));
    if (c <= target) {
      lo = mid;
      level_lo = c;
    } else {
      hi = mid;
    }
  }
  out.R_delta = std::exp(lo);
  out.level = level_lo;
  out.conclusive = true;
  return out;
}

double threshold_l0(const AnnulusSpec& spec, const ThresholdOptions& opts) {
  spec.validate();
  return annulus_level(spec, opts.cells, opts.solve) / resolve_c_infty(spec.exps, opts);
}

double threshold_l0_multi(const AnnulusSpec& spec, std::size_t m,
                          const ThresholdOptions& opts) {
  spec.validate();
  require(m >= 1, "threshold_l0_multi: m must be >= 1");
  const double k = static_cast<double>(m + 1);
  const AnnulusSpec root{std::pow(spec.R1, 1.0 / k), std::pow(spec.R2, 1.0 / k), spec.exps};
  return k * annulus_level(root, opts.cells, opts.solve) / resolve_c_infty(spec.exps, opts);
}

}  // namespace critlab
