#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "easyrl/env/types.hpp"

namespace easyrl::env {

// The environment contract: reset, step, render. Implementations override
// the do* hooks; the base enforces reset-before-step and never stepping past
// a terminal result.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvDescriptor& descriptor() const = 0;

  StepResult reset(std::optional<std::uint64_t> seed = std::nullopt);
  StepResult step(std::size_t action);
  Frame render() { return doRender(); }

  bool done() const { return done_; }

 protected:
  virtual StepResult doReset(std::optional<std::uint64_t> seed) = 0;
  virtual StepResult doStep(std::size_t action) = 0;
  virtual Frame doRender() = 0;

 private:
  bool started_ = false;
  bool done_ = false;
};

void checkAction(std::size_t action, std::size_t actionCount);

}  // namespace easyrl::env
