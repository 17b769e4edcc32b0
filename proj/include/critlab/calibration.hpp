#pragma once

// Equal-energy families on a geometric partition of an annulus, their
// sign-changing combinations, span energy bounds and the existence thresholds
// built from annulus levels.

#include <cstdint>
#include <string>
#include <vector>

#include "critlab/annulus.hpp"
#include "critlab/radial.hpp"

namespace critlab {

/// R2 = r_0 > r_1 > ... > r_m = R1 with r_i / r_{i-1} = (R1/R2)^{1/m}.
std::vector<double> partition_radii(double R1, double R2, std::size_t m);

struct CalibratedFamily {
  AnnulusSpec spec;
  std::vector<double> radii;            // descending, size m + 1
  RadialGrid grid;                      // full annulus; contains every r_i
  std::vector<RadialFunction> omegas;   // omega_i supported on [r_i, r_{i-1}]
  std::vector<double> levels;           // J(omega_i)
  double common_level = 0.0;
  std::size_t cells_per_piece = 0;

  [[nodiscard]] std::size_t size() const { return omegas.size(); }
};

/// Solves the m sub-annuli concurrently on restrictions of one global log grid
/// (cells_per_piece cells each) and extends the minimisers by zero.
/// Throws NonConvergenceError if a sub-solve fails and NumericError if the
/// pieces miss the 1e-6 equal-energy tolerance.
CalibratedFamily build_family(const AnnulusSpec& spec, std::size_t m,
                              std::size_t cells_per_piece,
                              const SolveOptions& opts = {});

/// Relative tolerance on |J(omega_i) - common_level|.
inline constexpr double kFamilyLevelTolerance = 1e-6;

/// sum_i (-1)^i omega_i. Disjoint supports give J = m * common_level.
RadialFunction sign_changing_candidate(const CalibratedFamily& family);

/// sum_{i<=k+1} max_t J(t omega_i); requires 1 <= k <= m - 1.
double span_energy_bound(const CalibratedFamily& family, std::size_t k);

struct SpanCheck {
  double bound = 0.0;
  double max_sampled = 0.0;
  std::size_t samples = 0;
};

/// Compares the bound with J on random elements sum c_i omega_i of the span,
/// c_i uniform on [-2, 2].
SpanCheck span_energy_check(const CalibratedFamily& family, std::size_t k,
                            std::size_t samples, std::uint64_t seed);

/// Numerical settings shared by the threshold computations.
struct ThresholdOptions {
  std::size_t cells = kDefaultLevelCells;
  SolveOptions solve;
  /// Quantum c_inf; <= 0 computes it with sobolev_constant.
  double c_infty = 0.0;
  /// Relative accuracy attached to every computed level.
  double level_tolerance = 1e-4;
  double R_min = 1e-3;
  double R_max = 0.95;
  std::size_t bisection_steps = 30;
};

struct SmallHoleThreshold {
  double R_delta = 0.0;
  double level = 0.0;    // c(R_delta, 1)
  double c_infty = 0.0;
  double tolerance = 0.0;
  bool conclusive = false;
  std::string note;
};

/// Largest R in [R_min, R_max] with c(R,1) <= c_inf + delta, by bisection in
/// log R. Inconclusive when delta is below twice the level tolerance or when
/// even c(R_min,1) exceeds the target.
SmallHoleThreshold threshold_small_hole(double delta, Exponents exps,
                                        const ThresholdOptions& opts = {});

/// c(R1,R2) / c_inf.
double threshold_l0(const AnnulusSpec& spec, const ThresholdOptions& opts = {});

/// (m + 1) c(R1^{1/(m+1)}, R2^{1/(m+1)}) / c_inf, m >= 1.
double threshold_l0_multi(const AnnulusSpec& spec, std::size_t m,
                          const ThresholdOptions& opts = {});

/// c_inf for opts, computing it when opts.c_infty <= 0.
double resolve_c_infty(Exponents exps, const ThresholdOptions& opts);

}  // namespace critlab
