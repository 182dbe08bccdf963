#pragma once

#include <array>
#include <string_view>

#include "easyrl/common/rng.hpp"
#include "easyrl/env/environment.hpp"

namespace easyrl::env {

namespace frozen_lake {

inline constexpr std::array<std::string_view, 4> kMap = {"SFFF", "FHFH", "FFFH",
                                                         "HFFG"};
inline constexpr std::size_t kSide = 4;
inline constexpr std::size_t kStates = 16;
inline constexpr std::size_t kActions = 4;  // 0 left, 1 down, 2 right, 3 up
inline constexpr std::size_t kMaxSteps = 100;

char cell(std::size_t state);

struct Outcome {
  std::size_t state;
  double reward;
  bool done;
};

// Deterministic move; off-grid moves keep the agent in place.
Outcome step(std::size_t state, std::size_t action);

}  // namespace frozen_lake

class FrozenLake : public Environment {
 public:
  explicit FrozenLake(bool slippery = false);

  const EnvDescriptor& descriptor() const override { return descriptor_; }
  std::size_t state() const { return state_; }

 protected:
  StepResult doReset(std::optional<std::uint64_t> seed) override;
  StepResult doStep(std::size_t action) override;
  Frame doRender() override;

 private:
  EnvDescriptor descriptor_;
  bool slippery_;
  Rng rng_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace easyrl::env
