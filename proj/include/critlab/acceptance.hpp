#pragma once

// The acceptance suite: eleven numbered checks with fixed tolerances and time
// budgets, shared by the acceptance test binary and `critlab verify-all`.

#include <cstdint>
#include <string>
#include <vector>

namespace critlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct AcceptanceOptions {
  std::size_t mc_samples = 1000000;  // per stratum, criterion 10
  std::uint64_t seed = 1;
};

inline constexpr int kCriterionCount = 11;

/// Runs criterion `id` (1..11). Exceptions inside a check are reported as a
/// failure with the message in `detail`.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "[PASS] 3 sobolev-constant (12.3 s / 30 s): ..." style line.
std::string format_result(const CriterionResult& r);

}  // namespace critlab
