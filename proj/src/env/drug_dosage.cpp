#include "easyrl/env/drug_dosage.hpp"

#include <algorithm>

namespace easyrl::env {

namespace drug_dosage {

Outcome step(const State& s, std::size_t action) {
  checkAction(action, kDoses.size());
  const double dose = kDoses[action];
  State next;
  next.burden = std::clamp(
      s.burden + 0.3 * s.burden * (1.0 - s.burden) - 0.8 * dose * s.burden, 0.0, 1.5);
  next.toxicity = std::clamp(s.toxicity + 0.5 * dose - 0.2 * s.toxicity, 0.0, 1.2);
  next.t = s.t + 1;
  double reward = -(next.burden + 0.5 * next.toxicity);
  bool done = next.t >= kMaxSteps;
  if (next.burden < kRemissionThreshold) {
    reward += kTerminalBonus;
    done = true;
  }
  if (next.toxicity > kToxicityLimit) {
    reward -= kTerminalBonus;
    done = true;
  }
  return {next, reward, done};
}

}  // namespace drug_dosage

DrugDosage::DrugDosage() {
  descriptor_ = EnvDescriptor{"DrugDosage-v0", ObsKind::continuous(3),
                              drug_dosage::kDoses.size(), drug_dosage::kMaxSteps,
                              false, "drugdosage"};
}

Observation DrugDosage::observe() const {
  return Observation::continuous(
      {state_.burden, state_.toxicity, static_cast<double>(state_.t)});
}

StepResult DrugDosage::doReset(std::optional<std::uint64_t>) {
  state_ = drug_dosage::State{};
  lastDose_ = 0.0;
  return {observe(), 0.0, false};
}

StepResult DrugDosage::doStep(std::size_t action) {
  const auto outcome = drug_dosage::step(state_, action);
  state_ = outcome.next;
  lastDose_ = drug_dosage::kDoses[action];
  return {observe(), outcome.reward, outcome.done};
}

Frame DrugDosage::doRender() {
  return Json{{"N", state_.burden}, {"T", state_.toxicity}, {"d", lastDose_}};
}

}  // namespace easyrl::env
