#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sel {

struct CriterionResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct AcceptanceOutcome {
  std::vector<CriterionResult> results;
  bool all_pass = true;
  // filename -> content, written by the front end
  std::vector<std::pair<std::string, std::string>> artifacts;
};

std::vector<std::string> acceptance_criteria_names();

// Runs the acceptance criteria; `only` filters by criterion name or by a
// property block name ("" runs everything).
AcceptanceOutcome run_acceptance(const std::string& only = "",
                                 std::uint64_t seed = 0);

}  // namespace sel
