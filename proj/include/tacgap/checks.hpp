#pragma once

// Invariant suite behind `tacgap check`: cheap versions of the per-module
// properties, each reduced to a pass/fail with a one-line detail.

#include <string>
#include <vector>

namespace tacgap {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_invariant_checks();

}  // namespace tacgap
