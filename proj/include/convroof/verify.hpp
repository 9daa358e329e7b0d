#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace convroof::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Smaller samples and fewer trials; a few seconds in total.
  bool quick = false;
  std::uint64_t seed = 0;
};

/// Property suite: roof restriction and bounds, midpoint convexity,
/// Caratheodory reduction, LP against basis enumeration, example oracles and
/// quantum identities. Every check runs; exceptions count as failures.
std::vector<CheckResult> run_suite(const SuiteOptions& options,
                                   const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace convroof::verify
