#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sel {

struct PropertyResult {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t failures = 0;
  std::string detail;  // first failure, when any
};

std::vector<std::string> property_block_names();
PropertyResult run_property_block(const std::string& name, std::uint64_t seed,
                                  std::uint64_t instances);
std::vector<PropertyResult> run_property_suites(std::uint64_t seed,
                                                std::uint64_t instances = 100);

}  // namespace sel
