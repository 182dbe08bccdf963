#include "easyrl/agents/q_network.hpp"

#include <algorithm>

#include "easyrl/agents/exploration.hpp"
#include "easyrl/common/error.hpp"

namespace easyrl::agents {

QBatch makeQBatch(const std::vector<const Transition*>& transitions,
                  const ObservationEncoder& encoder) {
  const std::size_t n = transitions.size();
  QBatch batch;
  batch.states = nn::Tensor::matrix(n, encoder.width());
  batch.nextStates = nn::Tensor::matrix(n, encoder.width());
  batch.actions.reserve(n);
  batch.rewards.reserve(n);
  batch.dones.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *transitions[i];
    encoder.encode(t.observation, batch.states.row(i));
    encoder.encode(t.nextObservation, batch.nextStates.row(i));
    batch.actions.push_back(t.action);
    batch.rewards.push_back(t.reward);
    batch.dones.push_back(t.done);
  }
  return batch;
}

std::vector<double> dqnTargets(const QBatch& batch, const nn::DenseNet& online,
                               const nn::DenseNet& target, double gamma) {
  (void)online;
  if (batch.size() == 0) fail(ErrorCode::Argument, "dqnTargets: empty batch");
  nn::DenseCache cache;
  const nn::Tensor& next = target.forwardBatch(batch.nextStates, cache);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = next.row(i);
    const double best = *std::max_element(row.begin(), row.end());
    y[i] = batch.rewards[i] + (batch.dones[i] ? 0.0 : gamma * best);
  }
  return y;
}

std::vector<double> ddqnTargets(const QBatch& batch, const nn::DenseNet& online,
                                const nn::DenseNet& target, double gamma) {
  if (batch.size() == 0) fail(ErrorCode::Argument, "ddqnTargets: empty batch");
  nn::DenseCache onlineCache;
  nn::DenseCache targetCache;
  const nn::Tensor& selector = online.forwardBatch(batch.nextStates, onlineCache);
  const nn::Tensor& evaluator = target.forwardBatch(batch.nextStates, targetCache);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t a = argmax(selector.row(i));
    y[i] = batch.rewards[i] + (batch.dones[i] ? 0.0 : gamma * evaluator.at(i, a));
  }
  return y;
}

LossAndGrad qLossAndGrad(const nn::DenseNet& online, const QBatch& batch,
                         const std::vector<double>& targets) {
  nn::requireDim(targets.size(), batch.size(), "q targets");
  nn::DenseCache cache;
  const nn::Tensor& q = online.forwardBatch(batch.states, cache);
  const double n = static_cast<double>(batch.size());
  nn::Tensor upstream(q.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double diff = q.at(i, batch.actions[i]) - targets[i];
    loss += diff * diff;
    upstream.at(i, batch.actions[i]) = 2.0 * diff / n;
  }
  return {loss / n, online.backwardBatch(cache, upstream).params};
}

QNetworkAgent::QNetworkAgent(Variant variant, const EnvDescriptor& env,
                             const Hyperparameters& hp)
    : id_(variant == Variant::Dqn ? "dqn" : "ddqn"),
      variant_(variant),
      hp_(hp),
      encoder_(env.obsKind),
      buffer_(hp.bufferCapacity),
      rng_(hp.seed + 2) {
  Rng init(hp.seed + 1);
  online_ = nn::DenseNet::create(encoder_.width(), hp.hiddenLayers, env.actionCount,
                                 nn::Activation::Relu, nn::Activation::Identity, init);
  target_ = online_;
  adam_ = nn::Adam(online_.parameters());
}

void QNetworkAgent::beginEpisode() { ++episode_; }

std::size_t QNetworkAgent::chooseAction(const Observation& observation, Mode mode) {
  if (mode == Mode::Train) {
    const double eps = annealEpsilon(hp_, globalStep_);
    if (eps > 0.0 && rng_.uniform() < eps) return rng_.uniformInt(online_.outputDim());
  }
  const nn::Tensor q = online_.forward(nn::Tensor::vector(encoder_.encode(observation)));
  return argmax(q.data());
}

void QNetworkAgent::observe(const Transition& transition) {
  buffer_.push(transition, episode_);
  ++globalStep_;
  ++stepsSinceUpdate_;
}

std::optional<double> QNetworkAgent::update() {
  if (buffer_.size() < hp_.batchSize || stepsSinceUpdate_ < hp_.updateEvery) {
    return std::nullopt;
  }
  stepsSinceUpdate_ = 0;
  return trainStep();
}

double QNetworkAgent::trainStep() {
  const QBatch batch = makeQBatch(buffer_.sampleUniform(hp_.batchSize, rng_), encoder_);
  const auto targets = variant_ == Variant::Dqn
                           ? dqnTargets(batch, online_, target_, hp_.gamma)
                           : ddqnTargets(batch, online_, target_, hp_.gamma);
  auto result = qLossAndGrad(online_, batch, targets);
  auto grads = result.grads.flatten();
  nn::clipGlobalNorm(grads, kGradClipNorm);
  adam_.step(online_.parameters(), grads, hp_.learningRate);
  ++updates_;
  if (updates_ % hp_.targetSyncInterval == 0) syncTarget();
  return result.loss;
}

std::optional<double> QNetworkAgent::epsilon() const { return annealEpsilon(hp_, globalStep_); }

std::vector<WeightSection> QNetworkAgent::serialize() const {
  std::vector<WeightSection> out;
  appendNet(out, "online", online_);
  appendNet(out, "target", target_);
  return out;
}

void QNetworkAgent::deserialize(const std::vector<WeightSection>& sections) {
  restoreNet(sections, "online", online_);
  restoreNet(sections, "target", target_);
}

}  // namespace easyrl::agents
