#pragma once

// Brute-force equivalence checks at small p: every fast path against its
// explicit Kronecker construction, plus the exact structural invariants.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace covsel::validate {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  /// Worst observed error in the check's own metric.
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 0;
  /// Random instances per (p, n) configuration.
  std::size_t instances = 100;
  /// Flips the sign of the ||P Sigma P||^2 term in the Gaussian closed form;
  /// exists to prove the suite detects a wrong formula.
  bool inject_fault = false;
};

/// Runs every check once, in a fixed order. Names are unique.
std::vector<CheckResult> run_suite(const SuiteOptions& options);

}  // namespace covsel::validate
