#pragma once

#include <string>
#include <vector>

namespace nsstat {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// leray, energy, anisotropy, taylor-green, khm-shear, gradient-rep.
const std::vector<std::string>& check_suites();

/// Runs one built-in verification suite; throws ConfigError for unknown names.
std::vector<CheckResult> run_check_suite(const std::string& suite);

}  // namespace nsstat
