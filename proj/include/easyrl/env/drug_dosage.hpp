#pragma once

#include <array>

#include "easyrl/env/environment.hpp"

namespace easyrl::env {

// Surrogate chemotherapy model: tumour burden N grows logistically and is
// killed in proportion to the dose; toxicity T accumulates with dose and
// clears at a fixed rate.
namespace drug_dosage {

inline constexpr std::array<double, 4> kDoses = {0.0, 0.25, 0.5, 1.0};
inline constexpr std::size_t kMaxSteps = 60;
inline constexpr double kInitialBurden = 0.6;
inline constexpr double kRemissionThreshold = 0.05;
inline constexpr double kToxicityLimit = 1.0;
inline constexpr double kTerminalBonus = 10.0;

struct State {
  double burden = kInitialBurden;
  double toxicity = 0.0;
  std::size_t t = 0;
};

struct Outcome {
  State next;
  double reward;
  bool done;
};

Outcome step(const State& s, std::size_t action);

}  // namespace drug_dosage

class DrugDosage : public Environment {
 public:
  DrugDosage();

  const EnvDescriptor& descriptor() const override { return descriptor_; }

 protected:
  StepResult doReset(std::optional<std::uint64_t> seed) override;
  StepResult doStep(std::size_t action) override;
  Frame doRender() override;

 private:
  Observation observe() const;

  EnvDescriptor descriptor_;
  drug_dosage::State state_;
  double lastDose_ = 0.0;
};

}  // namespace easyrl::env
