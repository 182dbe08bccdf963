#pragma once

#include <optional>

#include "easyrl/agents/agent.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/nn/tensor.hpp"

namespace easyrl::agents {

struct QTable {
  QTable(std::size_t states, std::size_t actions)
      : values(nn::Tensor::matrix(states, actions)) {}

  std::size_t stateCount() const { return values.rows(); }
  std::size_t actionCount() const { return values.cols(); }
  double& operator()(std::size_t s, std::size_t a) { return values.at(s, a); }
  double operator()(std::size_t s, std::size_t a) const { return values.at(s, a); }
  std::span<const double> row(std::size_t s) const { return values.row(s); }

  nn::Tensor values;
};

// Q(s,a) += alpha * (r + gamma * (1 - done) * max_a' Q(s',a') - Q(s,a)).
// Returns the new Q(s,a).
double qLearningUpdate(QTable& table, const Transition& t, double alpha, double gamma);

// Same with the on-policy target Q(s', nextAction).
double sarsaUpdate(QTable& table, const Transition& t, std::size_t nextAction,
                   double alpha, double gamma);

class TabularAgent : public Agent {
 public:
  enum class Rule { QLearning, Sarsa };

  TabularAgent(Rule rule, const EnvDescriptor& env, const Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  void beginEpisode() override;
  std::size_t chooseAction(const Observation& observation, Mode mode) override;
  void observe(const Transition& transition) override;
  std::optional<double> update() override;
  std::optional<double> epsilon() const override;
  std::vector<WeightSection> serialize() const override;
  void deserialize(const std::vector<WeightSection>& sections) override;

  const QTable& table() const { return table_; }
  QTable& table() { return table_; }

 private:
  std::string id_;
  Rule rule_;
  Hyperparameters hp_;
  QTable table_;
  Rng rng_;
  std::uint64_t globalStep_ = 0;
  std::optional<double> pendingError_;  // squared TD error of the last observe
  // SARSA commits to a' when updating, and must then play it.
  std::optional<std::pair<std::size_t, std::size_t>> plannedAction_;  // (state, action)
};

}  // namespace easyrl::agents
