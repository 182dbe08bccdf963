#pragma once

#include <memory>

#include "easyrl/agents/agent.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/nn/adam.hpp"
#include "easyrl/nn/dense_net.hpp"
#include "easyrl/replay/replay_buffer.hpp"

namespace easyrl::agents {

// A replay minibatch flattened into network inputs.
struct QBatch {
  nn::Tensor states;      // B x d
  nn::Tensor nextStates;  // B x d
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;

  std::size_t size() const { return actions.size(); }
};

QBatch makeQBatch(const std::vector<const Transition*>& transitions,
                  const ObservationEncoder& encoder);

// y_i = r_i + gamma (1 - done_i) max_a Q_target(s'_i, a)
std::vector<double> dqnTargets(const QBatch& batch, const nn::DenseNet& online,
                               const nn::DenseNet& target, double gamma);

// y_i = r_i + gamma (1 - done_i) Q_target(s'_i, argmax_a Q_online(s'_i, a))
std::vector<double> ddqnTargets(const QBatch& batch, const nn::DenseNet& online,
                                const nn::DenseNet& target, double gamma);

struct LossAndGrad {
  double loss = 0.0;
  nn::DenseGrads grads;
};

// Mean squared error between Q_online(s_i, a_i) and y_i, backpropagated
// through the taken-action outputs only.
LossAndGrad qLossAndGrad(const nn::DenseNet& online, const QBatch& batch,
                         const std::vector<double>& targets);

inline constexpr double kGradClipNorm = 10.0;

class QNetworkAgent : public Agent {
 public:
  enum class Variant { Dqn, Ddqn };

  QNetworkAgent(Variant variant, const EnvDescriptor& env, const Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  void beginEpisode() override;
  std::size_t chooseAction(const Observation& observation, Mode mode) override;
  void observe(const Transition& transition) override;
  std::optional<double> update() override;
  std::optional<double> epsilon() const override;
  std::vector<WeightSection> serialize() const override;
  void deserialize(const std::vector<WeightSection>& sections) override;

  // Samples a batch, takes one Adam step, syncs the target on schedule.
  double trainStep();

  void syncTarget() { target_ = online_; }
  const nn::DenseNet& online() const { return online_; }
  nn::DenseNet& online() { return online_; }
  const nn::DenseNet& target() const { return target_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t updates() const { return updates_; }

 private:
  std::string id_;
  Variant variant_;
  Hyperparameters hp_;
  ObservationEncoder encoder_;
  nn::DenseNet online_;
  nn::DenseNet target_;
  nn::Adam adam_;
  replay::ReplayBuffer buffer_;
  Rng rng_;
  std::uint64_t globalStep_ = 0;
  std::uint64_t episode_ = 0;
  std::uint64_t updates_ = 0;
  std::size_t stepsSinceUpdate_ = 0;
};

}  // namespace easyrl::agents
