#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ksrl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  /// Reduced sample counts; still deterministic.
  bool quick = false;
  /// Negate the score-product term of the Stein kernel (mutation test of the suite itself).
  bool inject_fault = false;
  std::uint64_t seed = 20240601;
};

/// Kernel symmetry and PSD, gradient checks, incremental-KSD equivalence, thinning contract
/// on synthetic dictionaries, BLR conjugacy and CEM quadratic recovery.
std::vector<CheckResult> run_invariant_checks(const CheckOptions& opts = {});

}  // namespace ksrl
