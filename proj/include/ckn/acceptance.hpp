#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ckn {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int jobs = 1;
  std::uint64_t seed = 1;
};

inline constexpr int kCriterionCount = 10;

/// Runs the listed criteria (all when empty) in order. Numerical errors inside a criterion are
/// caught and reported as a failure of that criterion.
/// on_result is called after each criterion.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options = {}, const std::vector<int>& only = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3 spectral identities (12.3 s): detail"
std::string format_result(const CriterionResult& result);

}  // namespace ckn
