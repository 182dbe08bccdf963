#include <doctest.h>

#include <cmath>

#include "easyrl/agents/builtin.hpp"
#include "easyrl/agents/exploration.hpp"
#include "easyrl/agents/policy_gradient.hpp"
#include "easyrl/agents/q_network.hpp"
#include "easyrl/agents/recurrent.hpp"
#include "easyrl/agents/tabular.hpp"
#include "easyrl/common/error.hpp"
#include "easyrl/env/builtin.hpp"
#include "easyrl/nn/adam.hpp"
#include "support/oracles.hpp"

using namespace easyrl;
using namespace easyrl::agents;
using env::Observation;
using nn::Activation;
using nn::DenseNet;
using nn::Tensor;

namespace {

env::EnvDescriptor envDesc(const std::string& id) {
  for (const auto& f : env::builtinEnvironments())
    if (f.descriptor.id == id) return f.descriptor;
  throw std::runtime_error("no env " + id);
}

Transition discreteT(std::size_t s, std::size_t a, double r, std::size_t s2, bool done) {
  return {Observation::discrete(s), a, r, Observation::discrete(s2), done};
}

void randomize(Tensor& t, Rng& rng, double scale) {
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
}

// Single identity layer whose output is the bias, whatever the input.
DenseNet constantNet(std::vector<double> values, std::size_t inputDim) {
  Tensor w = Tensor::matrix(values.size(), inputDim);
  return DenseNet({{w, Tensor::vector(std::move(values)), Activation::Identity}});
}

QBatch randomBatch(Rng& rng, std::size_t n, std::size_t d) {
  QBatch b;
  b.states = Tensor::matrix(n, d);
  b.nextStates = Tensor::matrix(n, d);
  randomize(b.states, rng, 2.0);
  randomize(b.nextStates, rng, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    b.actions.push_back(rng.uniformInt(3));
    b.rewards.push_back(rng.uniform(-1, 1));
    b.dones.push_back(rng.bernoulli(0.3));
  }
  return b;
}

std::vector<double> rowOf(const Tensor& t, std::size_t r) {
  return {t.row(r).begin(), t.row(r).end()};
}

DenseNet tanhPolicy(Rng& rng, std::size_t in, std::size_t actions) {
  auto net = DenseNet::create(in, {5}, actions, Activation::Tanh, Activation::Softmax, rng);
  for (auto& l : net.layers()) randomize(l.bias, rng, 0.3);
  return net;
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("hyperparameter bounds") {
  Hyperparameters hp;
  CHECK_NOTHROW(hp.validate());
  hp.gamma = 1.5;
  try {
    hp.validate();
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::Validation));
    CHECK(std::string(e.what()) == "gamma must be in [0,1]");
  }
  hp = {};
  hp.epsilonEnd = 0.9;
  hp.epsilonStart = 0.5;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = {};
  hp.batchSize = 0;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = {};
  hp.clipEpsilon = 1.0;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = {};
  hp.learningRate = 0;
  CHECK_THROWS_AS(hp.validate(), Error);
}

TEST_CASE("hyperparameter key=value parsing") {
  Hyperparameters hp;
  hp.set("gamma", "0.5");
  hp.set("hiddenLayers", "16,8");
  hp.set("seed", "12");
  CHECK(hp.gamma == 0.5);
  CHECK(hp.hiddenLayers == std::vector<std::size_t>{16, 8});
  CHECK(hp.seed == 12);
  try {
    hp.set("gama", "0.5");
    FAIL("expected unknown key");
  } catch (const Error& e) {
    const std::string msg = e.what();
    for (const auto& k : Hyperparameters::keys()) CHECK(msg.find(k) != std::string::npos);
  }
  CHECK_THROWS_AS(hp.set("batchSize", "many"), Error);
  CHECK(Hyperparameters::tooltips().size() == Hyperparameters::keys().size());
}

TEST_CASE("hyperparameter json round trip") {
  Hyperparameters hp;
  hp.gamma = 0.9;
  hp.hiddenLayers = {3};
  hp.seed = 99;
  nlohmann::json j = hp;
  Hyperparameters back;
  applyJson(back, j);
  CHECK(back == hp);
  CHECK_THROWS_AS(applyJson(back, nlohmann::json{{"nope", 1}}), Error);
}

TEST_CASE("linear epsilon schedule") {
  Hyperparameters hp;
  hp.epsilonStart = 1.0;
  hp.epsilonEnd = 0.05;
  hp.epsilonDecaySteps = 10000;
  CHECK(annealEpsilon(hp, 0) == 1.0);
  CHECK(annealEpsilon(hp, 5000) == doctest::Approx(0.525));
  CHECK(annealEpsilon(hp, 10000) == doctest::Approx(0.05));
  CHECK(annealEpsilon(hp, 50000) == doctest::Approx(0.05));
}

TEST_CASE("epsilon greedy") {
  Rng rng(1);
  std::vector<double> q = {1, 3, 2};
  CHECK(epsilonGreedy(q, 0.0, rng) == 1);
  std::vector<double> tie = {2, 2};
  CHECK(epsilonGreedy(tie, 0.0, rng) == 0);
  std::vector<std::size_t> counts(4);
  std::vector<double> four = {0, 9, 0, 0};
  for (int i = 0; i < 100000; ++i) counts[epsilonGreedy(four, 1.0, rng)]++;
  for (auto c : counts) CHECK(std::abs(c / 100000.0 - 0.25) <= 0.01);
}

TEST_CASE("greedy choice is invariant to shifting every q-value") {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> q(5);
    for (auto& v : q) v = std::round(rng.uniform(-3, 3));  // integer values force ties
    const double shift = std::round(rng.uniform(-100, 100));
    auto shifted = q;
    for (auto& v : shifted) v += shift;
    CHECK(argmax(q) == argmax(shifted));
    CHECK(argmax(q) == oracle::firstArgmax(q));
  }
}

TEST_CASE("q-learning update arithmetic") {
  QTable t(4, 2);
  CHECK(qLearningUpdate(t, discreteT(0, 1, 1.0, 1, true), 0.5, 0.9) == 0.5);
  QTable u(4, 2);
  u(0, 0) = 0.3;
  CHECK(qLearningUpdate(u, discreteT(0, 0, 1.0, 1, false), 0.0, 0.9) == 0.3);
  QTable v(4, 2);
  v(0, 0) = 1;
  v(1, 0) = 0;
  v(1, 1) = 2;
  CHECK(qLearningUpdate(v, discreteT(0, 0, 0.0, 1, false), 0.1, 0.9) == doctest::Approx(1.08));
}

TEST_CASE("sarsa update arithmetic") {
  auto table = [] {
    QTable v(4, 2);
    v(0, 0) = 1;
    v(1, 1) = 2;
    return v;
  };
  auto a = table();
  CHECK(sarsaUpdate(a, discreteT(0, 0, 0.0, 1, false), 1, 0.1, 0.9) == doctest::Approx(1.08));
  auto b = table();
  CHECK(sarsaUpdate(b, discreteT(0, 0, 0.0, 1, false), 0, 0.1, 0.9) == doctest::Approx(0.9));
  auto c = table();
  auto d = table();
  CHECK(sarsaUpdate(c, discreteT(0, 0, 0.5, 1, true), 0, 0.1, 0.9) ==
        sarsaUpdate(d, discreteT(0, 0, 0.5, 1, true), 1, 0.1, 0.9));
}

TEST_CASE("dqn and ddqn targets on hand-built nets") {
  QBatch b;
  b.states = Tensor::matrix(1, 2);
  b.nextStates = Tensor::matrix(1, 2);
  b.actions = {0};
  b.rewards = {0.0};
  b.dones = {false};
  auto online = constantNet({1, 0}, 2), target = constantNet({0, 2}, 2);
  CHECK(ddqnTargets(b, online, target, 0.9)[0] == 0.0);
  CHECK(dqnTargets(b, online, target, 0.9)[0] == doctest::Approx(1.8));
  b.rewards = {0.7};
  b.dones = {true};
  CHECK(dqnTargets(b, online, target, 0.9)[0] == 0.7);
  CHECK(ddqnTargets(b, online, target, 0.9)[0] == 0.7);
}

TEST_CASE("targets agree with per-element recomputation") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    auto online = DenseNet::create(4, {8}, 3, Activation::Relu, Activation::Identity, rng);
    auto target = DenseNet::create(4, {8}, 3, Activation::Relu, Activation::Identity, rng);
    auto b = randomBatch(rng, 32, 4);
    const double gamma = trial == 0 ? 0.0 : rng.uniform(0, 1);
    auto y = dqnTargets(b, online, target, gamma);
    auto yd = ddqnTargets(b, online, target, gamma);
    auto same = ddqnTargets(b, online, online, gamma);
    auto sameDqn = dqnTargets(b, online, online, gamma);
    for (std::size_t i = 0; i < 32; ++i) {
      const auto qt = target.forward(Tensor::vector(rowOf(b.nextStates, i))).values();
      const auto qo = online.forward(Tensor::vector(rowOf(b.nextStates, i))).values();
      const double cont = b.dones[i] ? 0.0 : 1.0;
      CHECK(y[i] == b.rewards[i] + gamma * cont * oracle::maxOf(qt));
      CHECK(yd[i] == b.rewards[i] + gamma * cont * qt[oracle::firstArgmax(qo)]);
      CHECK(same[i] == sameDqn[i]);
      if (gamma == 0.0) CHECK(y[i] == b.rewards[i]);
    }
  }
}

TEST_CASE("q loss is zero when targets equal predictions") {
  Rng rng(3);
  auto net = DenseNet::create(3, {4}, 3, Activation::Relu, Activation::Identity, rng);
  auto b = randomBatch(rng, 8, 3);
  std::vector<double> y;
  for (std::size_t i = 0; i < 8; ++i)
    y.push_back(net.forward(Tensor::vector(rowOf(b.states, i)))[b.actions[i]]);
  auto lg = qLossAndGrad(net, b, y);
  CHECK(lg.loss == doctest::Approx(0.0).epsilon(1e-24));
  for (const auto& g : lg.grads.flatten())
    for (double v : g.values()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("q loss gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto net = DenseNet::create(3, {4}, 3, Activation::Tanh, Activation::Identity, rng);
    auto b = randomBatch(rng, 6, 3);
    std::vector<double> y(6);
    for (auto& v : y) v = rng.uniform(-1, 1);
    auto lg = qLossAndGrad(net, b, y);
    auto loss = [&] {
      double s = 0;
      for (std::size_t i = 0; i < 6; ++i) {
        const double d = oracle::forward(net, rowOf(b.states, i))[b.actions[i]] - y[i];
        s += d * d / 6.0;
      }
      return s;
    };
    CHECK(lg.loss == doctest::Approx(loss()).epsilon(1e-12));
    CHECK(oracle::maxGradError(net.parameters(), lg.grads.flatten(), loss) <= 1e-4);
  }
}

TEST_CASE("one small step on a linear q-net lowers the loss") {
  Rng rng(4);
  auto net = DenseNet::create(3, {}, 2, Activation::Identity, Activation::Identity, rng);
  auto b = randomBatch(rng, 1, 3);
  b.actions = {1};
  std::vector<double> y = {2.5};
  auto before = qLossAndGrad(net, b, y);
  auto params = net.parameters();
  auto grads = before.grads.flatten();
  nn::Adam adam(params);
  adam.step(params, grads, 1e-3);
  CHECK(qLossAndGrad(net, b, y).loss < before.loss);
}

TEST_CASE("dqn agent syncs its target net exactly and is deterministic") {
  Hyperparameters hp;
  hp.batchSize = 8;
  hp.targetSyncInterval = 3;
  hp.hiddenLayers = {8};
  auto run = [&](std::size_t sync) {
    hp.targetSyncInterval = sync;
    QNetworkAgent agent(QNetworkAgent::Variant::Dqn, envDesc("CartPole-v1"), hp);
    Rng rng(5);
    agent.beginEpisode();
    for (int i = 0; i < 20; ++i) {
      std::vector<double> s(4), s2(4);
      for (auto& v : s) v = rng.uniform(-1, 1);
      for (auto& v : s2) v = rng.uniform(-1, 1);
      agent.observe({Observation::continuous(s), rng.uniformInt(2), 1.0,
                     Observation::continuous(s2), false});
    }
    std::vector<double> losses;
    for (int k = 1; k <= 6; ++k) {
      losses.push_back(agent.trainStep());
      if (k % sync == 0) CHECK(agent.target() == agent.online());
      else CHECK_FALSE(agent.target() == agent.online());
    }
    return std::make_pair(losses, agent.serialize());
  };
  run(3);
  auto a = run(1), b = run(1);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("reinforce returns") {
  auto g = reinforceReturns({1, 1, 1}, 0.9);
  CHECK(g[0] == doctest::Approx(2.71));
  CHECK(g[1] == doctest::Approx(1.9));
  CHECK(g[2] == 1.0);
  CHECK(reinforceReturns({3, -1, 2}, 0.0) == std::vector<double>{3, -1, 2});
  auto n = reinforceReturns(std::vector<double>(6, 1.0), 1.0);
  for (std::size_t t = 0; t < 6; ++t) CHECK(n[t] == 6.0 - t);
}

TEST_CASE("reinforce baseline cancels uniform returns") {
  Rng rng(6);
  auto policy = tanhPolicy(rng, 3, 2);
  Tensor states = Tensor::matrix(4, 3);
  randomize(states, rng, 1);
  auto lg = reinforceLossAndGrad(policy, states, {0, 1, 1, 0}, {2, 2, 2, 2});
  for (const auto& g : lg.grads.flatten())
    for (double v : g.values()) CHECK(v == 0.0);
}

TEST_CASE("reinforce step raises the better action's probability") {
  Rng rng(7);
  auto policy = tanhPolicy(rng, 2, 2);
  Tensor states = Tensor::matrix(2, 2);
  states.at(0, 0) = states.at(1, 0) = 0.5;
  states.at(0, 1) = states.at(1, 1) = -0.3;
  // same state twice: action 1 returned more than action 0
  const std::vector<std::size_t> actions = {1, 0};
  const std::vector<double> returns = {1.0, 0.0};
  const double before = policy.forward(Tensor::vector(rowOf(states, 0)))[1];
  auto lg = reinforceLossAndGrad(policy, states, actions, returns);
  auto params = policy.parameters();
  nn::Adam adam(params);
  adam.step(params, lg.grads.flatten(), 1e-2);
  CHECK(policy.forward(Tensor::vector(rowOf(states, 0)))[1] > before);
}

TEST_CASE("reinforce gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    auto policy = tanhPolicy(rng, 3, 3);
    Tensor states = Tensor::matrix(5, 3);
    randomize(states, rng, 1);
    std::vector<std::size_t> actions;
    std::vector<double> rewards;
    for (int t = 0; t < 5; ++t) {
      actions.push_back(rng.uniformInt(3));
      rewards.push_back(rng.uniform(-1, 1));
    }
    auto returns = reinforceReturns(rewards, 0.95);
    auto lg = reinforceLossAndGrad(policy, states, actions, returns);
    double mean = 0;
    for (double g : returns) mean += g / 5;
    auto loss = [&] {
      double s = 0;
      for (std::size_t t = 0; t < 5; ++t)
        s -= std::log(oracle::forward(policy, rowOf(states, t))[actions[t]]) * (returns[t] - mean);
      return s;
    };
    CHECK(lg.loss == doctest::Approx(loss()).epsilon(1e-12));
    CHECK(oracle::maxGradError(policy.parameters(), lg.grads.flatten(), loss) <= 1e-4);
  }
}

TEST_CASE("ppo clipped objective arithmetic") {
  CHECK(ppoClippedObjective(1.5, 1.0, 0.2) == doctest::Approx(1.2));
  CHECK(ppoClippedObjective(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
  CHECK(ppoClippedObjective(1.1, 2.0, 0.2) == doctest::Approx(2.2));
  CHECK_FALSE(ppoUnclippedActive(1.5, 1.0, 0.2));
  CHECK_FALSE(ppoUnclippedActive(0.5, -1.0, 0.2));
  CHECK(ppoUnclippedActive(1.5, -1.0, 0.2));
  CHECK(ppoUnclippedActive(0.5, 1.0, 0.2));
}

TEST_CASE("ppo gradient inside the trust region is the plain ratio gradient") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(200 + seed);
    auto policy = tanhPolicy(rng, 3, 3);
    Tensor states = Tensor::matrix(4, 3);
    randomize(states, rng, 1);
    std::vector<std::size_t> actions;
    std::vector<double> old, adv;
    for (std::size_t i = 0; i < 4; ++i) {
      actions.push_back(rng.uniformInt(3));
      const double p = oracle::forward(policy, rowOf(states, i))[actions.back()];
      old.push_back(p / rng.uniform(0.85, 1.15));
      adv.push_back(rng.uniform(-2, 2));
    }
    auto lg = ppoPolicyLossAndGrad(policy, states, actions, old, adv, 0.2);
    auto loss = [&] {
      double s = 0;
      for (std::size_t i = 0; i < 4; ++i)
        s -= oracle::forward(policy, rowOf(states, i))[actions[i]] / old[i] * adv[i] / 4;
      return s;
    };
    CHECK(oracle::maxGradError(policy.parameters(), lg.grads.flatten(), loss) <= 1e-4);
  }
}

TEST_CASE("ppo rejects non-positive stored probabilities") {
  Rng rng(8);
  auto policy = tanhPolicy(rng, 2, 2);
  Tensor states = Tensor::matrix(1, 2);
  try {
    ppoPolicyLossAndGrad(policy, states, {0}, {0.0}, {1.0}, 0.2);
    FAIL("expected contract error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::Contract));
  }
}

TEST_CASE("ppo clipped samples contribute exactly zero gradient") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto policy = tanhPolicy(rng, 3, 2);
    Tensor state = Tensor::matrix(1, 3);
    randomize(state, rng, 1);
    const std::size_t a = rng.uniformInt(2);
    const double p = oracle::forward(policy, rowOf(state, 0))[a];
    const bool positive = trial % 2 == 0;
    const double ratio = positive ? rng.uniform(1.25, 3.0) : rng.uniform(0.05, 0.75);
    const double advantage = positive ? rng.uniform(0.1, 2) : -rng.uniform(0.1, 2);
    auto lg = ppoPolicyLossAndGrad(policy, state, {a}, {p / ratio}, {advantage}, 0.2);
    for (const auto& g : lg.grads.flatten())
      for (double v : g.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("value loss gradient matches finite differences") {
  Rng rng(10);
  auto value = DenseNet::create(3, {4}, 1, Activation::Tanh, Activation::Identity, rng);
  Tensor states = Tensor::matrix(5, 3);
  randomize(states, rng, 1);
  std::vector<double> returns = {1, -2, 0.5, 3, 0};
  auto lg = valueLossAndGrad(value, states, returns);
  auto loss = [&] {
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const double d = oracle::forward(value, rowOf(states, i))[0] - returns[i];
      s += d * d / 5;
    }
    return s;
  };
  CHECK(oracle::maxGradError(value.parameters(), lg.grads.flatten(), loss) <= 1e-4);
}

TEST_CASE("adrqn encoding") {
  std::vector<double> obs = {0.5};
  auto e = adrqnEncode(obs, 2, 4);
  CHECK(e.values() == std::vector<double>{0.5, 0, 0, 1, 0});
  CHECK(adrqnEncode(obs, std::nullopt, 4).values() == std::vector<double>{0.5, 0, 0, 0, 0});
  std::vector<double> wide = {1, 2, 3};
  CHECK(adrqnEncode(wide, 0, 2).size() == 5);
  try {
    adrqnEncode(obs, 4, 4);
    FAIL("expected argument error");
  } catch (const Error& e2) {
    CHECK((e2.code() == ErrorCode::Argument));
  }
}

namespace {

struct SeqFixture {
  std::vector<Transition> storage;
  std::vector<std::vector<const Transition*>> seqs;
};

SeqFixture randomSequences(Rng& rng, std::size_t batch, std::size_t length, std::size_t dim,
                           std::size_t actions) {
  SeqFixture f;
  f.storage.reserve(batch * length);
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> s(dim);
    for (auto& v : s) v = rng.uniform(-1, 1);
    for (std::size_t t = 0; t < length; ++t) {
      std::vector<double> n(dim);
      for (auto& v : n) v = rng.uniform(-1, 1);
      f.storage.push_back({Observation::continuous(s), rng.uniformInt(actions), rng.uniform(-1, 1),
                           Observation::continuous(n), t + 1 == length && rng.bernoulli(0.5)});
      s = n;
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<const Transition*> seq;
    for (std::size_t t = 0; t < length; ++t) seq.push_back(&f.storage[b * length + t]);
    f.seqs.push_back(seq);
  }
  return f;
}

}  // namespace

TEST_CASE("recurrent targets match a per-sequence unroll") {
  Rng rng(11);
  auto net = RecurrentQNet::create(3, 4, 2, rng);
  auto f = randomSequences(rng, 5, 4, 3, 2);
  auto batch = makeSequenceBatch(f.seqs);
  auto y = recurrentTargets(net, batch, 0.9);
  for (std::size_t b = 0; b < 5; ++b) {
    Tensor h({4});
    for (std::size_t t = 0; t < 4; ++t) net.step(Tensor::vector(rowOf(batch.inputs[t], b)), h);
    (void)h;
    Tensor h2({4});
    std::vector<double> best;
    for (std::size_t t = 0; t <= 4; ++t) {
      auto x = t < 4 ? rowOf(batch.inputs[t], b) : rowOf(batch.lastNextInputs, b);
      best.push_back(oracle::maxOf(net.step(Tensor::vector(x), h2).values()));
    }
    for (std::size_t t = 0; t < 4; ++t) {
      const double expect = f.seqs[b][t]->reward + (f.seqs[b][t]->done ? 0.0 : 0.9 * best[t + 1]);
      CHECK(y[t][b] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("hidden size zero and length one reduce to dqn targets") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = RecurrentQNet::create(3, 0, 2, rng);
    auto f = randomSequences(rng, 8, 1, 3, 2);
    auto rq = recurrentTargets(net, makeSequenceBatch(f.seqs), 0.95);
    std::vector<const Transition*> flat;
    for (const auto& s : f.seqs) flat.push_back(s[0]);
    auto qb = makeQBatch(flat, ObservationEncoder(env::ObsKind::continuous(3)));
    auto dq = dqnTargets(qb, net.head, net.head, 0.95);
    for (std::size_t b = 0; b < 8; ++b) CHECK(rq[0][b] == dq[b]);
  }
}

TEST_CASE("recurrent loss gradient matches finite differences over three steps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(300 + seed);
    auto net = RecurrentQNet::create(2, 3, 2, rng);
    for (auto* p : net.parameters()) randomize(*p, rng, 0.7);
    auto f = randomSequences(rng, 3, 3, 2, 2);
    auto batch = makeSequenceBatch(f.seqs);
    std::vector<std::vector<double>> y(3, std::vector<double>(3));
    for (auto& row : y)
      for (auto& v : row) v = rng.uniform(-1, 1);
    auto lg = recurrentLossAndGrad(net, batch, y);
    auto loss = [&] {
      double s = 0;
      for (std::size_t b = 0; b < 3; ++b) {
        std::vector<double> h(3, 0.0);
        for (std::size_t t = 0; t < 3; ++t) {
          auto x = rowOf(batch.inputs[t], b);
          h = oracle::gruStep(net.gru, x, h);
          x.insert(x.end(), h.begin(), h.end());
          const double d = oracle::forward(net.head, x)[batch.actions[t][b]] - y[t][b];
          s += d * d / 9.0;
        }
      }
      return s;
    };
    CHECK(lg.loss == doctest::Approx(loss()).epsilon(1e-12));
    CHECK(oracle::maxGradError(net.parameters(), lg.grads, loss) <= 1e-4);
  }
}

TEST_CASE("recurrent loss goes to zero with zero rewards and no discount") {
  Rng rng(13);
  auto net = RecurrentQNet::create(2, 4, 2, rng);
  auto f = randomSequences(rng, 4, 5, 2, 2);
  for (auto& t : f.storage) t.reward = 0.0;
  auto batch = makeSequenceBatch(f.seqs);
  auto y = recurrentTargets(net, batch, 0.0);
  for (const auto& row : y)
    for (double v : row) CHECK(v == 0.0);
  nn::Adam adam(net.parameters());
  const double first = recurrentLossAndGrad(net, batch, y).loss;
  double last = first;
  for (int i = 0; i < 500; ++i) {
    auto lg = recurrentLossAndGrad(net, batch, y);
    adam.step(net.parameters(), lg.grads, 1e-2);
    last = lg.loss;
  }
  CHECK(last < 1e-3 * first);
}

TEST_CASE("adrqn and zero-padded drqn share weights and loss bit for bit") {
  Hyperparameters hp;
  hp.seed = 4;
  auto desc = envDesc("EMarket-v0");
  RecurrentQAgent padded(RecurrentQAgent::Encoding::ObservationPadded, desc, hp);
  RecurrentQAgent adrqn(RecurrentQAgent::Encoding::ActionConditioned, desc, hp);
  CHECK(padded.online() == adrqn.online());
  auto obs = Observation::continuous({1.0, 0.3});
  CHECK(padded.encode(obs, std::nullopt) == adrqn.encode(obs, std::nullopt));
  CHECK(padded.encode(obs, 2) == std::vector<double>{1.0, 0.3, 0, 0, 0, 0});
  CHECK(adrqn.encode(obs, 2) == std::vector<double>{1.0, 0.3, 0, 0, 1, 0});

  Rng rng(14);
  auto f = randomSequences(rng, 6, 8, 6, 4);
  auto batch = makeSequenceBatch(f.seqs);
  auto ya = recurrentTargets(padded.target(), batch, 0.99);
  auto yb = recurrentTargets(adrqn.target(), batch, 0.99);
  CHECK(ya == yb);
  auto la = recurrentLossAndGrad(padded.online(), batch, ya);
  auto lb = recurrentLossAndGrad(adrqn.online(), batch, yb);
  CHECK(la.loss == lb.loss);
  CHECK(la.grads == lb.grads);
}

TEST_CASE("builtin agent registry") {
  CHECK(builtinAgents().size() == 8);
  CHECK(findBuiltinAgent("foo") == nullptr);
  try {
    createBuiltinAgent("foo", envDesc("CartPole-v1"), {});
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::NotFound));
  }
  try {
    createBuiltinAgent("qlearning", envDesc("CartPole-v1"), {});
    FAIL("expected incompatible");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::Incompatible));
  }
  for (const auto& d : builtinAgents()) {
    nlohmann::json j = d;
    for (auto k : {"id", "displayName", "description", "supportedObsKinds", "defaultHyperparameters", "tooltips"})
      CHECK(j.contains(k));
  }
}

TEST_CASE("tabular agents report squared td error as loss") {
  Hyperparameters hp;
  hp.learningRate = 0.5;
  TabularAgent agent(TabularAgent::Rule::QLearning, envDesc("FrozenLake-v0"), hp);
  agent.beginEpisode();
  agent.observe(discreteT(14, 2, 1.0, 15, true));
  auto loss = agent.update();
  REQUIRE(loss.has_value());
  CHECK(*loss == doctest::Approx(1.0));
  CHECK_FALSE(agent.update().has_value());
}

TEST_CASE("every builtin agent round-trips its state and learns nothing in test mode") {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"qlearning", "FrozenLake-v0"}, {"sarsa", "FrozenLake-v0"}, {"dqn", "CartPole-v1"},
      {"ddqn", "CartPole-v1"},        {"reinforce", "CartPole-v1"}, {"ppo", "CartPole-v1"},
      {"drqn", "EMarket-v0"},         {"adrqn", "EMarket-v0"}};
  for (const auto& [agentId, envId] : pairs) {
    CAPTURE(agentId);
    Hyperparameters hp = findBuiltinAgent(agentId)->defaults;
    hp.batchSize = 8;
    hp.rolloutSteps = 16;
    hp.hiddenLayers = {8};
    hp.recurrentHidden = 4;
    hp.seqLen = 4;
    hp.seed = 21;
    const auto desc = envDesc(envId);
    auto agent = createBuiltinAgent(agentId, desc, hp);
    std::unique_ptr<env::Environment> env;
    for (const auto& f : env::builtinEnvironments())
      if (f.descriptor.id == envId) env = f.create();
    // some training so the state is not the initial one
    for (int ep = 0; ep < 3; ++ep) {
      auto r = env->reset(ep == 0 ? std::optional<std::uint64_t>(5) : std::nullopt);
      agent->beginEpisode();
      for (int i = 0; i < 60 && !r.done; ++i) {
        const auto a = agent->chooseAction(r.observation, Mode::Train);
        auto n = env->step(a);
        agent->observe({r.observation, a, n.reward, n.observation, n.done});
        agent->update();
        r = n;
      }
      agent->endEpisode();
      agent->update();
    }
    const auto saved = agent->serialize();
    auto fresh = createBuiltinAgent(agentId, desc, hp);
    fresh->deserialize(saved);
    CHECK(fresh->serialize() == saved);

    auto r = env->reset(9);
    agent->beginEpisode();
    for (int i = 0; i < 40 && !r.done; ++i) r = env->step(agent->chooseAction(r.observation, Mode::Test));
    CHECK(agent->serialize() == saved);
  }
}

}
