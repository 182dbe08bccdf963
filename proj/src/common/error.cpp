#include "easyrl/common/error.hpp"

namespace easyrl {

std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::NotReady: return "not_ready";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Incompatible: return "incompatible";
    case ErrorCode::State: return "state";
    case ErrorCode::Format: return "format";
    case ErrorCode::Corruption: return "corruption";
    case ErrorCode::Io: return "io";
    case ErrorCode::PluginSpawn: return "plugin_spawn";
    case ErrorCode::PluginTimeout: return "plugin_timeout";
    case ErrorCode::PluginParse: return "plugin_parse";
    case ErrorCode::PluginVersion: return "plugin_version";
    case ErrorCode::PluginContract: return "plugin_contract";
    case ErrorCode::PluginDeath: return "plugin_death";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

}  // namespace easyrl
