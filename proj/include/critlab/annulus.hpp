#pragma once

// The radial annulus level c(R1, R2) = inf { J(u) : u radial, on the Nehari
// manifold of the annulus }, computed by constrained descent and, independently,
// by shooting on the radial ODE.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "critlab/radial.hpp"

namespace critlab {

enum class LineSearch { armijo };
enum class InitKind { parabolic_bump, custom };
enum class Method { descent, shooting };

struct SolveOptions {
  std::size_t max_iters = 20000;
  /// Relative energy change that counts as stalled (needs 5 in a row).
  double energy_tol = 1e-10;
  /// Bound on ode_residual for the descent stop and the shooting check.
  double residual_tol = 1e-6;
  LineSearch line_search = LineSearch::armijo;
  InitKind init = InitKind::parabolic_bump;
  /// Initial guess for InitKind::custom; must live on the solve grid.
  std::optional<RadialFunction> custom_init;
  /// Cells of the log grid on which shooting solutions are sampled.
  std::size_t shooting_cells = 16384;
  /// Absolute and relative tolerance of the adaptive integrator.
  double ode_tol = 1e-12;

  void validate() const;
};

struct EnergyReport {
  double level = 0.0;
  double Q = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  Method method = Method::descent;
  bool converged = false;
  /// Energies of the accepted iterates (descent only).
  std::vector<double> history;
  /// max over iterates of |J - Q^{N/p}/N| / J (descent only).
  double nehari_defect = 0.0;
  /// Shooting slope u'(R1) (shooting only).
  double shooting_slope = 0.0;
};

struct AnnulusSolution {
  RadialFunction profile;
  EnergyReport report;
};

inline constexpr std::size_t kMinSolveCells = 64;

/// Preconditioned gradient descent on nodal values with Armijo backtracking,
/// rescaling onto the Nehari manifold and replacing u by |u| after every step.
/// Non-convergence is reported through report.converged, not thrown.
AnnulusSolution minimize_annulus(const AnnulusSpec& spec, std::size_t cells,
                                 const SolveOptions& opts = {});

/// Same, on an explicit grid (e.g. a sub-grid of a larger partition).
AnnulusSolution minimize_on_grid(const RadialGrid& grid, const SolveOptions& opts = {});

/// Integrates the flux form of the radial equation from R1 with u(R1) = 0 and
/// bisection/secant on u'(R1) until u first vanishes at R2.
/// Throws NumericError when no bracket for the slope is found.
AnnulusSolution shoot_annulus(const AnnulusSpec& spec, const SolveOptions& opts = {});

/// |c(R1,R2) - c(R1/R2,1)| / c(R1/R2,1) on dilation-matched log grids.
double scaling_check(const AnnulusSpec& spec, std::size_t cells,
                     const SolveOptions& opts = {});

struct CurveRow {
  double R = 0.0;
  double level = 0.0;
  double excess = 0.0;  // level - c_inf
  bool converged = false;
};

/// c(R,1) over `radii`, sorted by R descending. Solves run concurrently.
std::vector<CurveRow> c_curve(Exponents exps, std::vector<double> radii,
                              double c_infty, std::size_t cells,
                              const SolveOptions& opts = {});

/// Default number of cells used for level computations.
inline constexpr std::size_t kDefaultLevelCells = 2048;

/// c(R1, R2) on a log grid; throws NumericError when the descent does not
/// converge.
double annulus_level(const AnnulusSpec& spec, std::size_t cells = kDefaultLevelCells,
                     const SolveOptions& opts = {});

}  // namespace critlab
