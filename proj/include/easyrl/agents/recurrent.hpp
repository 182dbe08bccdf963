#pragma once

#include <optional>

#include "easyrl/agents/agent.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/nn/adam.hpp"
#include "easyrl/nn/dense_net.hpp"
#include "easyrl/nn/gru.hpp"
#include "easyrl/replay/replay_buffer.hpp"

namespace easyrl::agents {

// [observation ; oneHot(lastAction)], all-zero action part when lastAction is
// empty (episode start).
nn::Tensor adrqnEncode(std::span<const double> observation,
                       std::optional<std::size_t> lastAction, std::size_t actionCount);

// GRU followed by a linear head over [x ; h].
struct RecurrentQNet {
  nn::GruCell gru;
  nn::DenseNet head;

  static RecurrentQNet create(std::size_t inputDim, std::size_t hiddenDim,
                              std::size_t actionCount, Rng& rng);

  std::size_t inputDim() const { return gru.inputDim(); }
  std::size_t hiddenDim() const { return gru.hiddenDim(); }
  std::size_t actionCount() const { return head.outputDim(); }

  // Advances hidden in place and returns Q-values for the step.
  nn::Tensor step(const nn::Tensor& input, nn::Tensor& hidden) const;

  std::vector<nn::Tensor*> parameters();

  friend bool operator==(const RecurrentQNet&, const RecurrentQNet&) = default;
};

// Batch of equal-length windows, inputs already encoded: inputs[t] is B x d.
struct SequenceBatch {
  std::vector<nn::Tensor> inputs;
  nn::Tensor lastNextInputs;  // B x d, encoded s' of the final step
  std::vector<std::vector<std::size_t>> actions;  // [t][b]
  std::vector<std::vector<double>> rewards;
  std::vector<std::vector<bool>> dones;

  std::size_t length() const { return inputs.size(); }
  std::size_t batch() const { return inputs.empty() ? 0 : inputs.front().rows(); }
};

SequenceBatch makeSequenceBatch(const std::vector<std::vector<const Transition*>>& sequences);

// Per-step targets r + gamma (1 - done) max_a Q_target(s'_t, a), with the
// target net unrolled from a zero hidden state over the same window.
std::vector<std::vector<double>> recurrentTargets(const RecurrentQNet& target,
                                                  const SequenceBatch& batch,
                                                  double gamma);

struct RecurrentLossAndGrad {
  double loss = 0.0;
  std::vector<nn::Tensor> grads;  // ordered like RecurrentQNet::parameters()
};

// Mean squared error over every (step, sequence) pair, with full BPTT from a
// zero initial hidden state.
RecurrentLossAndGrad recurrentLossAndGrad(const RecurrentQNet& online,
                                          const SequenceBatch& batch,
                                          const std::vector<std::vector<double>>& targets);

class RecurrentQAgent : public Agent {
 public:
  enum class Encoding {
    Observation,        // DRQN
    ObservationPadded,  // DRQN with actionCount zero columns appended
    ActionConditioned,  // ADRQN
  };

  RecurrentQAgent(Encoding encoding, const EnvDescriptor& env, const Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  void beginEpisode() override;
  std::size_t chooseAction(const Observation& observation, Mode mode) override;
  void observe(const Transition& transition) override;
  std::optional<double> update() override;
  std::optional<double> epsilon() const override;
  std::vector<WeightSection> serialize() const override;
  void deserialize(const std::vector<WeightSection>& sections) override;

  double trainStep();

  std::vector<double> encode(const Observation& obs,
                             std::optional<std::size_t> lastAction) const;
  const RecurrentQNet& online() const { return online_; }
  RecurrentQNet& online() { return online_; }
  const RecurrentQNet& target() const { return target_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }

 private:
  std::string id_;
  Encoding encoding_;
  Hyperparameters hp_;
  ObservationEncoder encoder_;
  std::size_t actionCount_;
  RecurrentQNet online_;
  RecurrentQNet target_;
  nn::Adam adam_;
  replay::ReplayBuffer buffer_;
  Rng rng_;
  nn::Tensor hidden_;
  std::optional<std::size_t> lastAction_;
  std::vector<double> lastInput_;
  std::uint64_t globalStep_ = 0;
  std::uint64_t episode_ = 0;
  std::uint64_t updates_ = 0;
  std::size_t stepsSinceUpdate_ = 0;
};

}  // namespace easyrl::agents
