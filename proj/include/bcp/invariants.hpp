#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bcp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Randomized property checks over the core routines. Each check runs a few
/// dozen random instances derived from `seed`.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed = 20240601);

}  // namespace bcp
