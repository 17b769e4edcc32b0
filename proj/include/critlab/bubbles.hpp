#pragma once

// Multi-bubble configurations v0(|x|) + sum of rescaled Talenti profiles placed
// on group orbits, with Monte Carlo integration over R^N of the gradient norm
// and of phi_inf(u) = int |grad u|^p / p - |u|^{p*} / p*.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critlab/radial.hpp"
#include "critlab/sobolev.hpp"
#include "critlab/symmetry.hpp"

namespace critlab {

struct TalentiBubble {
  Vector center;
  double scale = 1.0;
  TalentiProfile profile;
  /// Multiplier in front of the profile (sign-changing configurations).
  double weight = 1.0;
};

struct BubbleEntry {
  TalentiBubble bubble;
  /// The bubble is replicated over the orbit of its center.
  GroupClosure group;
};

struct BubbleConfig {
  int dim = 0;
  /// v0, a radial function on an annulus; zero outside it.
  std::optional<RadialFunction> base;
  std::vector<BubbleEntry> bubbles;

  /// Throws DomainError for nonpositive scales, mismatched dimensions or
  /// incomplete groups.
  void validate() const;
};

/// One translated copy of a bubble.
struct PlacedBubble {
  Vector center;
  double scale = 1.0;
  double weight = 1.0;
  TalentiProfile profile;
};

struct Placement {
  std::vector<PlacedBubble> copies;
  /// Orbit size of every entry of BubbleConfig::bubbles.
  std::vector<std::size_t> multiplicity;
  /// min |y_i - y_j| / max(scale_i, scale_j) over distinct copies (+inf for one copy).
  double separation_ratio = 0.0;
  /// separation_ratio < kSeparationWarning.
  bool warning = false;
};

inline constexpr double kSeparationWarning = 10.0;

Placement place_bubbles(const BubbleConfig& cfg);

double evaluate_config(const BubbleConfig& cfg, const Vector& x);

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct MCParams {
  std::size_t samples = 1000000;  // per stratum
  std::uint64_t seed = 1;

  void validate() const;  // samples >= 1e4
};

inline constexpr std::size_t kMinMCSamples = 10000;

/// Radial quadrature of int_{R^N} |grad U|^p and int_{R^N} U^{p*}.
double talenti_grad_norm_p(const TalentiProfile& profile);
double talenti_lpstar_pow(const TalentiProfile& profile);
/// phi_inf(U) = grad / p - lpstar / p*.
double talenti_phi_infty(const TalentiProfile& profile);
/// Q(U)^{N/p} / N, the value of phi_inf at the Nehari projection of U.
double talenti_nehari_phi_infty(const TalentiProfile& profile);

/// int |grad u|^p over R^N by multiple-importance sampling: one stratum per
/// bubble copy with a radial proposal matched to the profile tail, one
/// far-field stratum and one annulus stratum for v0.
MCEstimate config_norm_p(const BubbleConfig& cfg, const MCParams& mc = {});

/// phi_inf of the configuration, same sampler.
MCEstimate config_phi_infty(const BubbleConfig& cfg, const MCParams& mc = {});

/// phi_inf at the Nehari projection of the configuration, Q^{N/p} / N with a
/// first-order propagated error.
MCEstimate projected_energy(const BubbleConfig& cfg, const MCParams& mc = {});

struct AdditivityReport {
  /// |total - prediction| / |prediction| for the gradient norm and for phi_inf.
  MCEstimate norm_deviation;
  MCEstimate energy_deviation;
  double norm_prediction = 0.0;    // ||v0||^p + sum |orbit| ||bubble||^p
  double energy_prediction = 0.0;  // J(v0) + sum |orbit| phi_inf(bubble)
  MCEstimate norm_total;
  MCEstimate energy_total;
  Placement placement;

  [[nodiscard]] double deviation() const;
};

/// The interaction total - prediction is integrated directly (the per-copy
/// integrands act as control variates), so its error scales with the
/// interaction rather than with the total.
AdditivityReport additivity_check(const BubbleConfig& cfg, const MCParams& mc = {});

struct QuantumReport {
  double phi = 0.0;            // phi_inf of the profile as given
  double projected_phi = 0.0;  // phi_inf after Nehari projection
  double c_infty = 0.0;
  double tolerance = 0.0;      // absolute, quadrature plus c_inf accuracy
  double two_cap_level = 0.0;  // J of the projected two-cap candidate
  bool above_quantum = false;  // projected_phi >= c_inf - tolerance
  bool two_cap_ok = false;     // two_cap_level >= 2 c_inf - tolerance_two_cap
};

struct QuantumOptions {
  /// Annulus carrying the two calibrated caps (split at sqrt(R1 R2)).
  double R1 = 0.25;
  double R2 = 1.0;
  std::size_t cells_per_piece = 2048;
  /// Relative slack allowed on the two-cap level.
  double two_cap_rel_tol = 0.01;
  /// Relative accuracy credited to the numerical c_inf.
  double c_infty_rel_tol = 5e-3;
  /// <= 0 computes c_inf with sobolev_constant.
  double c_infty = 0.0;
};

QuantumReport energy_quantum_check(const TalentiProfile& profile, const QuantumOptions& opts = {});

}  // namespace critlab
