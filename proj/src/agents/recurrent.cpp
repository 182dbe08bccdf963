#include "easyrl/agents/recurrent.hpp"

#include <algorithm>

#include "easyrl/agents/exploration.hpp"
#include "easyrl/agents/q_network.hpp"
#include "easyrl/common/error.hpp"

namespace easyrl::agents {
namespace {

// [x ; h] row by row.
nn::Tensor concatColumns(const nn::Tensor& x, const nn::Tensor& h) {
  const std::size_t batch = x.rows();
  nn::Tensor out = nn::Tensor::matrix(batch, x.cols() + h.cols());
  for (std::size_t b = 0; b < batch; ++b) {
    auto dst = out.row(b);
    const auto xr = x.row(b);
    const auto hr = h.row(b);
    std::copy(xr.begin(), xr.end(), dst.begin());
    std::copy(hr.begin(), hr.end(), dst.begin() + static_cast<std::ptrdiff_t>(x.cols()));
  }
  return out;
}

}  // namespace

nn::Tensor adrqnEncode(std::span<const double> observation,
                       std::optional<std::size_t> lastAction, std::size_t actionCount) {
  if (lastAction && *lastAction >= actionCount) {
    fail(ErrorCode::Argument, "last action " + std::to_string(*lastAction) +
                                  " out of range [0, " + std::to_string(actionCount) + ")");
  }
  std::vector<double> out(observation.begin(), observation.end());
  out.resize(observation.size() + actionCount, 0.0);
  if (lastAction) out[observation.size() + *lastAction] = 1.0;
  return nn::Tensor::vector(std::move(out));
}

RecurrentQNet RecurrentQNet::create(std::size_t inputDim, std::size_t hiddenDim,
                                    std::size_t actionCount, Rng& rng) {
  RecurrentQNet net;
  net.gru = nn::GruCell::create(inputDim, hiddenDim, rng);
  net.head = nn::DenseNet::create(inputDim + hiddenDim, {}, actionCount,
                                  nn::Activation::Identity, nn::Activation::Identity, rng);
  return net;
}

nn::Tensor RecurrentQNet::step(const nn::Tensor& input, nn::Tensor& hidden) const {
  hidden = gru.step(input, hidden);
  std::vector<double> joined(input.values());
  joined.insert(joined.end(), hidden.values().begin(), hidden.values().end());
  return head.forward(nn::Tensor::vector(std::move(joined)));
}

std::vector<nn::Tensor*> RecurrentQNet::parameters() {
  auto out = gru.parameters();
  for (nn::Tensor* p : head.parameters()) out.push_back(p);
  return out;
}

SequenceBatch makeSequenceBatch(const std::vector<std::vector<const Transition*>>& sequences) {
  SequenceBatch batch;
  if (sequences.empty() || sequences.front().empty()) return batch;
  const std::size_t n = sequences.size();
  const std::size_t length = sequences.front().size();
  const std::size_t width = sequences.front().front()->observation.values().size();
  batch.inputs.assign(length, nn::Tensor::matrix(n, width));
  batch.lastNextInputs = nn::Tensor::matrix(n, width);
  batch.actions.assign(length, std::vector<std::size_t>(n));
  batch.rewards.assign(length, std::vector<double>(n));
  batch.dones.assign(length, std::vector<bool>(n));
  for (std::size_t b = 0; b < n; ++b) {
    nn::requireDim(sequences[b].size(), length, "sequence length");
    for (std::size_t t = 0; t < length; ++t) {
      const Transition& tr = *sequences[b][t];
      const auto obs = tr.observation.values();
      nn::requireDim(obs.size(), width, "sequence input");
      std::copy(obs.begin(), obs.end(), batch.inputs[t].row(b).begin());
      batch.actions[t][b] = tr.action;
      batch.rewards[t][b] = tr.reward;
      batch.dones[t][b] = tr.done;
    }
    const auto next = sequences[b].back()->nextObservation.values();
    nn::requireDim(next.size(), width, "sequence input");
    std::copy(next.begin(), next.end(), batch.lastNextInputs.row(b).begin());
  }
  return batch;
}

std::vector<std::vector<double>> recurrentTargets(const RecurrentQNet& target,
                                                  const SequenceBatch& batch, double gamma) {
  const std::size_t length = batch.length();
  const std::size_t n = batch.batch();
  nn::Tensor hidden = nn::Tensor::matrix(n, target.hiddenDim());
  nn::DenseCache cache;
  // bestNext[k] = max_a Q_target after consuming inputs 0..k
  std::vector<std::vector<double>> bestNext(length + 1, std::vector<double>(n));
  for (std::size_t k = 0; k <= length; ++k) {
    const nn::Tensor& x = k < length ? batch.inputs[k] : batch.lastNextInputs;
    hidden = target.gru.stepBatch(x, hidden, nullptr);
    const nn::Tensor& q = target.head.forwardBatch(concatColumns(x, hidden), cache);
    for (std::size_t b = 0; b < n; ++b) {
      const auto row = q.row(b);
      bestNext[k][b] = *std::max_element(row.begin(), row.end());
    }
  }
  std::vector<std::vector<double>> y(length, std::vector<double>(n));
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      y[t][b] = batch.rewards[t][b] + (batch.dones[t][b] ? 0.0 : gamma * bestNext[t + 1][b]);
    }
  }
  return y;
}

RecurrentLossAndGrad recurrentLossAndGrad(const RecurrentQNet& online,
                                          const SequenceBatch& batch,
                                          const std::vector<std::vector<double>>& targets) {
  const std::size_t length = batch.length();
  const std::size_t n = batch.batch();
  nn::requireDim(targets.size(), length, "recurrent targets");
  const std::size_t width = online.inputDim();
  const std::size_t hid = online.hiddenDim();
  const double scale = 1.0 / static_cast<double>(n * length);

  std::vector<nn::GruStepCache> steps(length);
  std::vector<nn::DenseCache> heads(length);
  nn::Tensor hidden = nn::Tensor::matrix(n, hid);
  nn::DenseGrads headGrads = online.head.zeroGrads();
  std::vector<nn::Tensor> hiddenGrads(length);
  double loss = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    hidden = online.gru.stepBatch(batch.inputs[t], hidden, &steps[t]);
    const nn::Tensor& q = online.head.forwardBatch(concatColumns(batch.inputs[t], hidden), heads[t]);
    nn::Tensor upstream(q.shape());
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t a = batch.actions[t][b];
      const double diff = q.at(b, a) - targets[t][b];
      loss += scale * diff * diff;
      upstream.at(b, a) = 2.0 * scale * diff;
    }
    auto back = online.head.backwardBatch(heads[t], upstream);
    headGrads.add(back.params);
    hiddenGrads[t] = nn::Tensor::matrix(n, hid);
    for (std::size_t b = 0; b < n; ++b) {
      const auto src = back.inputGrad.row(b).subspan(width, hid);
      std::copy(src.begin(), src.end(), hiddenGrads[t].row(b).begin());
    }
  }
  const auto gruBack = online.gru.backwardSequence(steps, hiddenGrads);
  RecurrentLossAndGrad result{loss, gruBack.params.flatten()};
  for (auto& g : headGrads.flatten()) result.grads.push_back(std::move(g));
  return result;
}

RecurrentQAgent::RecurrentQAgent(Encoding encoding, const EnvDescriptor& env,
                                 const Hyperparameters& hp)
    : id_(encoding == Encoding::ActionConditioned ? "adrqn" : "drqn"),
      encoding_(encoding),
      hp_(hp),
      encoder_(env.obsKind),
      actionCount_(env.actionCount),
      buffer_(hp.bufferCapacity),
      rng_(hp.seed + 2) {
  Rng init(hp.seed + 1);
  const std::size_t inputDim =
      encoder_.width() + (encoding == Encoding::Observation ? 0 : actionCount_);
  online_ = RecurrentQNet::create(inputDim, hp.recurrentHidden, actionCount_, init);
  target_ = online_;
  adam_ = nn::Adam(online_.parameters());
  hidden_ = nn::Tensor({hp.recurrentHidden});
}

std::vector<double> RecurrentQAgent::encode(const Observation& obs,
                                            std::optional<std::size_t> lastAction) const {
  std::vector<double> base = encoder_.encode(obs);
  switch (encoding_) {
    case Encoding::Observation: return base;
    case Encoding::ObservationPadded: return adrqnEncode(base, std::nullopt, actionCount_).values();
    case Encoding::ActionConditioned: return adrqnEncode(base, lastAction, actionCount_).values();
  }
  return base;
}

void RecurrentQAgent::beginEpisode() {
  ++episode_;
  hidden_.fill(0.0);
  lastAction_.reset();
}

std::size_t RecurrentQAgent::chooseAction(const Observation& observation, Mode mode) {
  lastInput_ = encode(observation, lastAction_);
  const nn::Tensor q = online_.step(nn::Tensor::vector(lastInput_), hidden_);
  std::size_t action = 0;
  if (mode == Mode::Train) {
    action = epsilonGreedy(q.data(), annealEpsilon(hp_, globalStep_), rng_);
  } else {
    action = argmax(q.data());
  }
  lastAction_ = action;
  return action;
}

void RecurrentQAgent::observe(const Transition& transition) {
  Transition stored{Observation::continuous(lastInput_), transition.action, transition.reward,
                    Observation::continuous(encode(transition.nextObservation, transition.action)),
                    transition.done};
  buffer_.push(std::move(stored), episode_);
  ++globalStep_;
  ++stepsSinceUpdate_;
}

std::optional<double> RecurrentQAgent::update() {
  if (stepsSinceUpdate_ < hp_.updateEvery || buffer_.size() < hp_.batchSize ||
      buffer_.size() < hp_.seqLen) {
    return std::nullopt;
  }
  try {
    const double loss = trainStep();
    stepsSinceUpdate_ = 0;
    return loss;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotReady) return std::nullopt;
    throw;
  }
}

double RecurrentQAgent::trainStep() {
  const SequenceBatch batch =
      makeSequenceBatch(buffer_.sampleSequences(hp_.batchSize, hp_.seqLen, rng_));
  const auto targets = recurrentTargets(target_, batch, hp_.gamma);
  auto result = recurrentLossAndGrad(online_, batch, targets);
  nn::clipGlobalNorm(result.grads, kGradClipNorm);
  adam_.step(online_.parameters(), result.grads, hp_.learningRate);
  ++updates_;
  if (updates_ % hp_.targetSyncInterval == 0) target_ = online_;
  return result.loss;
}

std::optional<double> RecurrentQAgent::epsilon() const { return annealEpsilon(hp_, globalStep_); }

std::vector<WeightSection> RecurrentQAgent::serialize() const {
  std::vector<WeightSection> out;
  appendGru(out, "online.gru", online_.gru);
  appendNet(out, "online.head", online_.head);
  appendGru(out, "target.gru", target_.gru);
  appendNet(out, "target.head", target_.head);
  return out;
}

void RecurrentQAgent::deserialize(const std::vector<WeightSection>& sections) {
  restoreGru(sections, "online.gru", online_.gru);
  restoreNet(sections, "online.head", online_.head);
  restoreGru(sections, "target.gru", target_.gru);
  restoreNet(sections, "target.head", target_.head);
}

}  // namespace easyrl::agents
