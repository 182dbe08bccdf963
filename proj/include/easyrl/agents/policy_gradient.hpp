#pragma once

#include <utility>

#include "easyrl/agents/agent.hpp"
#include "easyrl/agents/q_network.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/nn/adam.hpp"
#include "easyrl/nn/dense_net.hpp"

namespace easyrl::agents {

inline constexpr double kProbabilityFloor = 1e-12;

// G_t = sum_{k>=t} gamma^(k-t) r_k by backward recursion.
std::vector<double> reinforceReturns(const std::vector<double>& rewards, double gamma);

// -sum_t log pi(a_t|s_t) (G_t - mean(G)) and its gradient. states is T x d.
LossAndGrad reinforceLossAndGrad(const nn::DenseNet& policy, const nn::Tensor& states,
                                 const std::vector<std::size_t>& actions,
                                 const std::vector<double>& returns);

// Per-sample clipped surrogate min(rho A, clip(rho, 1-eps, 1+eps) A).
double ppoClippedObjective(double ratio, double advantage, double clipEpsilon);

// True when the unclipped branch carries the gradient for this sample.
bool ppoUnclippedActive(double ratio, double advantage, double clipEpsilon);

// -mean(clipped surrogate) over the minibatch and its gradient.
LossAndGrad ppoPolicyLossAndGrad(const nn::DenseNet& policy, const nn::Tensor& states,
                                 const std::vector<std::size_t>& actions,
                                 const std::vector<double>& oldProbabilities,
                                 const std::vector<double>& advantages,
                                 double clipEpsilon);

// mean (V(s) - G)^2 and its gradient.
LossAndGrad valueLossAndGrad(const nn::DenseNet& value, const nn::Tensor& states,
                             const std::vector<double>& returns);

class ReinforceAgent : public Agent {
 public:
  ReinforceAgent(const EnvDescriptor& env, const Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  void beginEpisode() override;
  std::size_t chooseAction(const Observation& observation, Mode mode) override;
  void observe(const Transition& transition) override;
  std::optional<double> update() override;
  void endEpisode() override { episodeComplete_ = !rewards_.empty(); }
  std::vector<WeightSection> serialize() const override;
  void deserialize(const std::vector<WeightSection>& sections) override;

  // One Adam step on the stored episode; clears it.
  double trainStep();

  const nn::DenseNet& policy() const { return policy_; }
  nn::DenseNet& policy() { return policy_; }

 private:
  std::string id_;
  Hyperparameters hp_;
  ObservationEncoder encoder_;
  nn::DenseNet policy_;
  nn::Adam adam_;
  Rng rng_;
  std::vector<std::vector<double>> states_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  bool episodeComplete_ = false;
};

struct PpoRollout {
  std::vector<std::vector<double>> states;
  std::vector<std::size_t> actions;
  std::vector<double> oldProbabilities;
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
};

class PpoAgent : public Agent {
 public:
  PpoAgent(const EnvDescriptor& env, const Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  void beginEpisode() override;
  std::size_t chooseAction(const Observation& observation, Mode mode) override;
  void observe(const Transition& transition) override;
  std::optional<double> update() override;
  void endEpisode() override;
  std::vector<WeightSection> serialize() const override;
  void deserialize(const std::vector<WeightSection>& sections) override;

  // ppoEpochs passes of shuffled minibatches; returns mean (policy, value) loss.
  std::pair<double, double> trainStep(const PpoRollout& rollout);

  const nn::DenseNet& policy() const { return policy_; }
  const nn::DenseNet& value() const { return value_; }

 private:
  std::string id_;
  Hyperparameters hp_;
  ObservationEncoder encoder_;
  nn::DenseNet policy_;
  nn::DenseNet value_;
  nn::Adam policyAdam_;
  nn::Adam valueAdam_;
  Rng rng_;
  double lastProbability_ = 1.0;
  // current (unfinished) episode
  std::vector<std::vector<double>> states_;
  std::vector<std::size_t> actions_;
  std::vector<double> probabilities_;
  std::vector<double> rewards_;
  PpoRollout rollout_;
};

}  // namespace easyrl::agents
