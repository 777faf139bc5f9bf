#pragma once

#include <string>
#include <vector>

namespace xrate {

struct SelfCheck {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Exact-arithmetic invariant checks over every module, small enough to run
/// in a few seconds. Exceptions inside a check count as failures.
std::vector<SelfCheck> run_selftest();

}  // namespace xrate
