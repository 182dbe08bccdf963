#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace easyrl {

enum class ErrorCode {
  Shape,
  Numeric,
  Argument,
  Validation,
  Contract,
  NotReady,
  NotFound,
  Incompatible,
  State,
  Format,
  Corruption,
  Io,
  PluginSpawn,
  PluginTimeout,
  PluginParse,
  PluginVersion,
  PluginContract,
  PluginDeath,
  Internal,
};

std::string_view toString(ErrorCode code);

// Every failure surfaced by the library is an easyrl::Error; the code decides
// how callers (engine, service, CLI) classify it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  bool isPluginError() const noexcept {
    return code_ >= ErrorCode::PluginSpawn && code_ <= ErrorCode::PluginDeath;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace easyrl
