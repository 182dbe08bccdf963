#pragma once

#include "easyrl/common/rng.hpp"
#include "easyrl/env/environment.hpp"

namespace easyrl::env {

namespace cart_pole {

inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kForce = 10.0;
inline constexpr double kDt = 0.02;
inline constexpr double kPositionLimit = 2.4;
inline constexpr std::size_t kMaxSteps = 500;
double angleLimit();  // 12 degrees in radians

struct State {
  double x = 0.0;
  double xDot = 0.0;
  double theta = 0.0;
  double thetaDot = 0.0;
};

// One explicit-Euler step of the cart-pole dynamics.
State step(const State& s, std::size_t action);
bool outOfBounds(const State& s);

}  // namespace cart_pole

class CartPole : public Environment {
 public:
  CartPole();

  const EnvDescriptor& descriptor() const override { return descriptor_; }
  const cart_pole::State& state() const { return state_; }

 protected:
  StepResult doReset(std::optional<std::uint64_t> seed) override;
  StepResult doStep(std::size_t action) override;
  Frame doRender() override;

 private:
  Observation observe() const;

  EnvDescriptor descriptor_;
  Rng rng_;
  cart_pole::State state_;
  std::size_t steps_ = 0;
};

}  // namespace easyrl::env
