#include "easyrl/env/mountain_car.hpp"

#include <algorithm>
#include <cmath>

namespace easyrl::env {

namespace mountain_car {

State step(const State& s, std::size_t action) {
  checkAction(action, 3);
  State next;
  next.velocity = s.velocity +
                  (static_cast<double>(action) - 1.0) * kForce -
                  std::cos(3.0 * s.position) * kGravity;
  next.velocity = std::clamp(next.velocity, -kMaxSpeed, kMaxSpeed);
  next.position = std::clamp(s.position + next.velocity, kMinPosition, kMaxPosition);
  if (next.position == kMinPosition && next.velocity < 0.0) next.velocity = 0.0;
  return next;
}

}  // namespace mountain_car

MountainCar::MountainCar() {
  descriptor_ = EnvDescriptor{"MountainCar-v0", ObsKind::continuous(2), 3,
                              mountain_car::kMaxSteps, false, "mountaincar"};
}

StepResult MountainCar::doReset(std::optional<std::uint64_t> seed) {
  if (seed) rng_.reseed(*seed);
  state_.position = rng_.uniform(-0.6, -0.4);
  state_.velocity = 0.0;
  steps_ = 0;
  return {Observation::continuous({state_.position, state_.velocity}), 0.0, false};
}

StepResult MountainCar::doStep(std::size_t action) {
  state_ = mountain_car::step(state_, action);
  ++steps_;
  const bool done = state_.position >= mountain_car::kGoalPosition ||
                    steps_ >= mountain_car::kMaxSteps;
  return {Observation::continuous({state_.position, state_.velocity}), -1.0, done};
}

Frame MountainCar::doRender() { return Json{{"p", state_.position}}; }

}  // namespace easyrl::env
