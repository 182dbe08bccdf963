#include "easyrl/env/cart_pole.hpp"

#include <cmath>

namespace easyrl::env {

namespace cart_pole {

double angleLimit() { return 12.0 * 2.0 * M_PI / 360.0; }

State step(const State& s, std::size_t action) {
  checkAction(action, 2);
  const double force = action == 1 ? kForce : -kForce;
  const double totalMass = kMassPole + kMassCart;
  const double poleMassLength = kMassPole * kHalfLength;
  const double cosTheta = std::cos(s.theta);
  const double sinTheta = std::sin(s.theta);
  const double temp =
      (force + poleMassLength * s.thetaDot * s.thetaDot * sinTheta) / totalMass;
  const double thetaAcc =
      (kGravity * sinTheta - cosTheta * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cosTheta * cosTheta / totalMass));
  const double xAcc = temp - poleMassLength * thetaAcc * cosTheta / totalMass;
  State next;
  next.x = s.x + kDt * s.xDot;
  next.xDot = s.xDot + kDt * xAcc;
  next.theta = s.theta + kDt * s.thetaDot;
  next.thetaDot = s.thetaDot + kDt * thetaAcc;
  return next;
}

bool outOfBounds(const State& s) {
  return s.x < -kPositionLimit || s.x > kPositionLimit ||
         s.theta < -angleLimit() || s.theta > angleLimit();
}

}  // namespace cart_pole

CartPole::CartPole() {
  descriptor_ = EnvDescriptor{"CartPole-v1", ObsKind::continuous(4), 2,
                              cart_pole::kMaxSteps, false, "cartpole"};
}

Observation CartPole::observe() const {
  return Observation::continuous(
      {state_.x, state_.xDot, state_.theta, state_.thetaDot});
}

StepResult CartPole::doReset(std::optional<std::uint64_t> seed) {
  if (seed) rng_.reseed(*seed);
  state_.x = rng_.uniform(-0.05, 0.05);
  state_.xDot = rng_.uniform(-0.05, 0.05);
  state_.theta = rng_.uniform(-0.05, 0.05);
  state_.thetaDot = rng_.uniform(-0.05, 0.05);
  steps_ = 0;
  return {observe(), 0.0, false};
}

StepResult CartPole::doStep(std::size_t action) {
  state_ = cart_pole::step(state_, action);
  ++steps_;
  const bool done = cart_pole::outOfBounds(state_) || steps_ >= cart_pole::kMaxSteps;
  return {observe(), 1.0, done};
}

Frame CartPole::doRender() {
  return Json{{"x", state_.x}, {"theta", state_.theta}};
}

}  // namespace easyrl::env
