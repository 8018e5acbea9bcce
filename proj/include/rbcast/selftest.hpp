#pragma once

#include <string>
#include <vector>

namespace rbcast {

struct SelftestResult
{
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick oracle and property checks shipped with the CLI. Runs in a few seconds.
std::vector<SelftestResult> run_selftest();

} // namespace rbcast
