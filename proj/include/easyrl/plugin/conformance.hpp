#pragma once

#include <string>
#include <vector>

#include "easyrl/plugin/plugin.hpp"

namespace easyrl::plugin {

struct CheckResult {
  std::string message;  // message type exercised, e.g. "hello", "step"
  bool pass = false;
  std::string detail;
};

struct ConformanceReport {
  PluginKind kind = PluginKind::Environment;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string format() const;  // one "PASS|FAIL <message> <detail>" line per check
};

// Runs the full message matrix against a plugin. Never throws for plugin
// misbehaviour; every violation is recorded against the message that
// triggered it.
ConformanceReport checkConformance(const PluginSpec& spec);

}  // namespace easyrl::plugin
