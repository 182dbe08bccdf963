#include "easyrl/env/frozen_lake.hpp"

namespace easyrl::env {

namespace frozen_lake {

char cell(std::size_t state) { return kMap[state / kSide][state % kSide]; }

Outcome step(std::size_t state, std::size_t action) {
  checkAction(action, kActions);
  std::size_t row = state / kSide;
  std::size_t col = state % kSide;
  switch (action) {
    case 0: if (col > 0) --col; break;
    case 1: if (row + 1 < kSide) ++row; break;
    case 2: if (col + 1 < kSide) ++col; break;
    case 3: if (row > 0) --row; break;
  }
  const std::size_t next = row * kSide + col;
  const char c = cell(next);
  return {next, c == 'G' ? 1.0 : 0.0, c == 'G' || c == 'H'};
}

}  // namespace frozen_lake

FrozenLake::FrozenLake(bool slippery) : slippery_(slippery) {
  descriptor_ = EnvDescriptor{slippery ? "FrozenLakeSlippery-v0" : "FrozenLake-v0",
                              ObsKind::discrete(frozen_lake::kStates),
                              frozen_lake::kActions,
                              frozen_lake::kMaxSteps,
                              false,
                              "frozenlake"};
}

StepResult FrozenLake::doReset(std::optional<std::uint64_t> seed) {
  if (seed) rng_.reseed(*seed);
  state_ = 0;
  steps_ = 0;
  return {Observation::discrete(state_), 0.0, false};
}

StepResult FrozenLake::doStep(std::size_t action) {
  std::size_t effective = action;
  if (slippery_) {
    // chosen action, or one of the two perpendicular ones, each with 1/3
    const std::size_t branch = rng_.uniformInt(3);
    effective = (action + frozen_lake::kActions - 1 + branch) % frozen_lake::kActions;
  }
  const auto outcome = frozen_lake::step(state_, effective);
  state_ = outcome.state;
  ++steps_;
  return {Observation::discrete(state_), outcome.reward,
          outcome.done || steps_ >= frozen_lake::kMaxSteps};
}

Frame FrozenLake::doRender() {
  Json rows = Json::array();
  for (auto row : frozen_lake::kMap) rows.push_back(std::string(row));
  return Json{{"agent", state_}, {"map", rows}};
}

}  // namespace easyrl::env
