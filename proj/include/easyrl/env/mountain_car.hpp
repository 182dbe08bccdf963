#pragma once

#include "easyrl/common/rng.hpp"
#include "easyrl/env/environment.hpp"

namespace easyrl::env {

namespace mountain_car {

inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kGoalPosition = 0.5;
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = 0.0025;
inline constexpr std::size_t kMaxSteps = 200;

struct State {
  double position = -0.5;
  double velocity = 0.0;
};

State step(const State& s, std::size_t action);

}  // namespace mountain_car

class MountainCar : public Environment {
 public:
  MountainCar();

  const EnvDescriptor& descriptor() const override { return descriptor_; }

 protected:
  StepResult doReset(std::optional<std::uint64_t> seed) override;
  StepResult doStep(std::size_t action) override;
  Frame doRender() override;

 private:
  EnvDescriptor descriptor_;
  Rng rng_;
  mountain_car::State state_;
  std::size_t steps_ = 0;
};

}  // namespace easyrl::env
