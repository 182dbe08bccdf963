#include "easyrl/agents/policy_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "easyrl/agents/exploration.hpp"
#include "easyrl/common/error.hpp"

namespace easyrl::agents {
namespace {

nn::Tensor stackRows(const std::vector<std::vector<double>>& rows, std::size_t width) {
  nn::Tensor out = nn::Tensor::matrix(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), out.row(i).begin());
  }
  return out;
}

nn::Tensor gatherRows(const nn::Tensor& source, std::span<const std::size_t> indices) {
  nn::Tensor out = nn::Tensor::matrix(indices.size(), source.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto row = source.row(indices[i]);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& source, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(source[i]);
  return out;
}

void applyClippedStep(nn::DenseNet& net, nn::Adam& adam, const nn::DenseGrads& grads,
                      double learningRate) {
  auto flat = grads.flatten();
  nn::clipGlobalNorm(flat, kGradClipNorm);
  adam.step(net.parameters(), flat, learningRate);
}

}  // namespace

std::vector<double> reinforceReturns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> returns(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    returns[t] = running;
  }
  return returns;
}

LossAndGrad reinforceLossAndGrad(const nn::DenseNet& policy, const nn::Tensor& states,
                                 const std::vector<std::size_t>& actions,
                                 const std::vector<double>& returns) {
  nn::requireDim(actions.size(), states.rows(), "reinforce actions");
  nn::requireDim(returns.size(), states.rows(), "reinforce returns");
  const double baseline =
      returns.empty() ? 0.0
                      : std::accumulate(returns.begin(), returns.end(), 0.0) /
                            static_cast<double>(returns.size());
  nn::DenseCache cache;
  const nn::Tensor& probs = policy.forwardBatch(states, cache);
  nn::Tensor upstream(probs.shape());
  double loss = 0.0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const double advantage = returns[t] - baseline;
    const double p = probs.at(t, actions[t]);
    loss -= std::log(std::max(p, kProbabilityFloor)) * advantage;
    if (p > kProbabilityFloor) upstream.at(t, actions[t]) = -advantage / p;
  }
  return {loss, policy.backwardBatch(cache, upstream).params};
}

double ppoClippedObjective(double ratio, double advantage, double clipEpsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clipEpsilon, 1.0 + clipEpsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

bool ppoUnclippedActive(double ratio, double advantage, double clipEpsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clipEpsilon, 1.0 + clipEpsilon);
  return ratio * advantage <= clipped * advantage;
}

LossAndGrad ppoPolicyLossAndGrad(const nn::DenseNet& policy, const nn::Tensor& states,
                                 const std::vector<std::size_t>& actions,
                                 const std::vector<double>& oldProbabilities,
                                 const std::vector<double>& advantages,
                                 double clipEpsilon) {
  const std::size_t n = states.rows();
  nn::requireDim(actions.size(), n, "ppo actions");
  nn::requireDim(oldProbabilities.size(), n, "ppo old probabilities");
  nn::requireDim(advantages.size(), n, "ppo advantages");
  if (n == 0) fail(ErrorCode::Argument, "ppo: empty minibatch");
  nn::DenseCache cache;
  const nn::Tensor& probs = policy.forwardBatch(states, cache);
  nn::Tensor upstream(probs.shape());
  const double scale = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double old = oldProbabilities[i];
    if (!(old >= kProbabilityFloor)) {
      fail(ErrorCode::Contract, "ppo: stored behaviour probability must be positive");
    }
    const double ratio = probs.at(i, actions[i]) / old;
    loss -= scale * ppoClippedObjective(ratio, advantages[i], clipEpsilon);
    if (ppoUnclippedActive(ratio, advantages[i], clipEpsilon)) {
      upstream.at(i, actions[i]) = -scale * advantages[i] / old;
    }
  }
  return {loss, policy.backwardBatch(cache, upstream).params};
}

LossAndGrad valueLossAndGrad(const nn::DenseNet& value, const nn::Tensor& states,
                             const std::vector<double>& returns) {
  nn::requireDim(returns.size(), states.rows(), "value returns");
  nn::DenseCache cache;
  const nn::Tensor& v = value.forwardBatch(states, cache);
  const double n = static_cast<double>(returns.size());
  nn::Tensor upstream(v.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const double diff = v.at(i, 0) - returns[i];
    loss += diff * diff / n;
    upstream.at(i, 0) = 2.0 * diff / n;
  }
  return {loss, value.backwardBatch(cache, upstream).params};
}

// ---------------------------------------------------------------- REINFORCE

ReinforceAgent::ReinforceAgent(const EnvDescriptor& env, const Hyperparameters& hp)
    : id_("reinforce"), hp_(hp), encoder_(env.obsKind), rng_(hp.seed + 2) {
  Rng init(hp.seed + 1);
  policy_ = nn::DenseNet::create(encoder_.width(), hp.hiddenLayers, env.actionCount,
                                 nn::Activation::Relu, nn::Activation::Softmax, init);
  adam_ = nn::Adam(policy_.parameters());
}

void ReinforceAgent::beginEpisode() {
  states_.clear();
  actions_.clear();
  rewards_.clear();
  episodeComplete_ = false;
}

std::size_t ReinforceAgent::chooseAction(const Observation& observation, Mode mode) {
  const nn::Tensor probs = policy_.forward(nn::Tensor::vector(encoder_.encode(observation)));
  return mode == Mode::Test ? argmax(probs.data()) : sampleCategorical(probs.data(), rng_);
}

void ReinforceAgent::observe(const Transition& transition) {
  states_.push_back(encoder_.encode(transition.observation));
  actions_.push_back(transition.action);
  rewards_.push_back(transition.reward);
  if (transition.done) episodeComplete_ = true;
}

std::optional<double> ReinforceAgent::update() {
  if (!episodeComplete_) return std::nullopt;
  return trainStep();
}

double ReinforceAgent::trainStep() {
  if (rewards_.empty()) fail(ErrorCode::NotReady, "reinforce: no episode to learn from");
  const auto returns = reinforceReturns(rewards_, hp_.gamma);
  const auto result =
      reinforceLossAndGrad(policy_, stackRows(states_, encoder_.width()), actions_, returns);
  applyClippedStep(policy_, adam_, result.grads, hp_.learningRate);
  beginEpisode();
  return result.loss;
}

std::vector<WeightSection> ReinforceAgent::serialize() const {
  std::vector<WeightSection> out;
  appendNet(out, "policy", policy_);
  return out;
}

void ReinforceAgent::deserialize(const std::vector<WeightSection>& sections) {
  restoreNet(sections, "policy", policy_);
}

// ---------------------------------------------------------------------- PPO

PpoAgent::PpoAgent(const EnvDescriptor& env, const Hyperparameters& hp)
    : id_("ppo"), hp_(hp), encoder_(env.obsKind), rng_(hp.seed + 2) {
  Rng init(hp.seed + 1);
  policy_ = nn::DenseNet::create(encoder_.width(), hp.hiddenLayers, env.actionCount,
                                 nn::Activation::Relu, nn::Activation::Softmax, init);
  value_ = nn::DenseNet::create(encoder_.width(), hp.hiddenLayers, 1, nn::Activation::Relu,
                                nn::Activation::Identity, init);
  policyAdam_ = nn::Adam(policy_.parameters());
  valueAdam_ = nn::Adam(value_.parameters());
}

void PpoAgent::beginEpisode() {
  states_.clear();
  actions_.clear();
  probabilities_.clear();
  rewards_.clear();
}

std::size_t PpoAgent::chooseAction(const Observation& observation, Mode mode) {
  const nn::Tensor probs = policy_.forward(nn::Tensor::vector(encoder_.encode(observation)));
  if (mode == Mode::Test) return argmax(probs.data());
  const std::size_t action = sampleCategorical(probs.data(), rng_);
  lastProbability_ = probs[action];
  return action;
}

void PpoAgent::observe(const Transition& transition) {
  states_.push_back(encoder_.encode(transition.observation));
  actions_.push_back(transition.action);
  probabilities_.push_back(lastProbability_);
  rewards_.push_back(transition.reward);
  if (transition.done) endEpisode();
}

void PpoAgent::endEpisode() {
  if (rewards_.empty()) return;
  const auto returns = reinforceReturns(rewards_, hp_.gamma);
  for (std::size_t t = 0; t < rewards_.size(); ++t) {
    rollout_.states.push_back(std::move(states_[t]));
    rollout_.actions.push_back(actions_[t]);
    rollout_.oldProbabilities.push_back(probabilities_[t]);
    rollout_.returns.push_back(returns[t]);
  }
  beginEpisode();
}

std::optional<double> PpoAgent::update() {
  if (rollout_.size() < std::max(hp_.rolloutSteps, hp_.batchSize)) return std::nullopt;
  const auto [policyLoss, valueLoss] = trainStep(rollout_);
  rollout_ = PpoRollout{};
  return policyLoss + valueLoss;
}

std::pair<double, double> PpoAgent::trainStep(const PpoRollout& rollout) {
  const std::size_t n = rollout.size();
  if (n == 0) fail(ErrorCode::NotReady, "ppo: empty rollout");
  const nn::Tensor states = stackRows(rollout.states, encoder_.width());
  std::vector<double> advantages(n);
  {
    nn::DenseCache cache;
    const nn::Tensor& v = value_.forwardBatch(states, cache);
    for (std::size_t i = 0; i < n; ++i) advantages[i] = rollout.returns[i] - v.at(i, 0);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double policyTotal = 0.0;
  double valueTotal = 0.0;
  std::size_t minibatches = 0;
  for (std::size_t epoch = 0; epoch < hp_.ppoEpochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng_.uniformInt(i + 1)]);
    for (std::size_t start = 0; start < n; start += hp_.batchSize) {
      const auto idx = std::span<const std::size_t>(order).subspan(
          start, std::min(hp_.batchSize, n - start));
      const nn::Tensor mbStates = gatherRows(states, idx);
      const auto policyResult = ppoPolicyLossAndGrad(
          policy_, mbStates, gather(rollout.actions, idx),
          gather(rollout.oldProbabilities, idx), gather(advantages, idx), hp_.clipEpsilon);
      applyClippedStep(policy_, policyAdam_, policyResult.grads, hp_.learningRate);
      const auto valueResult = valueLossAndGrad(value_, mbStates, gather(rollout.returns, idx));
      applyClippedStep(value_, valueAdam_, valueResult.grads, hp_.learningRate);
      policyTotal += policyResult.loss;
      valueTotal += valueResult.loss;
      ++minibatches;
    }
  }
  return {policyTotal / static_cast<double>(minibatches),
          valueTotal / static_cast<double>(minibatches)};
}

std::vector<WeightSection> PpoAgent::serialize() const {
  std::vector<WeightSection> out;
  appendNet(out, "policy", policy_);
  appendNet(out, "value", value_);
  return out;
}

void PpoAgent::deserialize(const std::vector<WeightSection>& sections) {
  restoreNet(sections, "policy", policy_);
  restoreNet(sections, "value", value_);
}

}  // namespace easyrl::agents
