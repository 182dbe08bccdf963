#include "easyrl/env/environment.hpp"

#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::env {

void checkAction(std::size_t action, std::size_t actionCount) {
  if (action >= actionCount) {
    fail(ErrorCode::Argument, "action " + std::to_string(action) +
                                  " out of range [0, " +
                                  std::to_string(actionCount) + ")");
  }
}

StepResult Environment::reset(std::optional<std::uint64_t> seed) {
  StepResult result = doReset(seed);
  result.reward = 0.0;
  result.done = false;
  started_ = true;
  done_ = false;
  return result;
}

StepResult Environment::step(std::size_t action) {
  if (!started_) fail(ErrorCode::Contract, descriptor().id + ": step called before reset");
  if (done_) fail(ErrorCode::Contract, descriptor().id + ": step called on a finished episode");
  checkAction(action, descriptor().actionCount);
  StepResult result = doStep(action);
  if (!std::isfinite(result.reward) || !result.observation.allFinite()) {
    fail(ErrorCode::Numeric, descriptor().id + ": non-finite step result");
  }
  done_ = result.done;
  return result;
}

}  // namespace easyrl::env
