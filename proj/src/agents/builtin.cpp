#include "easyrl/agents/builtin.hpp"

#include "easyrl/agents/policy_gradient.hpp"
#include "easyrl/agents/q_network.hpp"
#include "easyrl/agents/recurrent.hpp"
#include "easyrl/agents/tabular.hpp"
#include "easyrl/common/error.hpp"

namespace easyrl::agents {
namespace {

using Kind = env::ObsKind::Type;

std::vector<AgentDescriptor> makeDescriptors() {
  Hyperparameters tabular;
  tabular.learningRate = 0.1;

  Hyperparameters deep;

  Hyperparameters policy;
  policy.learningRate = 3e-3;

  Hyperparameters recurrent;
  recurrent.bufferCapacity = 20000;

  const std::vector<Kind> any{Kind::Discrete, Kind::Continuous};
  return {
      {"qlearning", "Q-Learning", "Off-policy tabular temporal-difference control.",
       {Kind::Discrete}, true, tabular},
      {"sarsa", "SARSA", "On-policy tabular temporal-difference control.",
       {Kind::Discrete}, true, tabular},
      {"dqn", "Deep Q-Network", "Q-network trained from replay with a periodically synced target.",
       any, true, deep},
      {"ddqn", "Double DQN", "DQN with online action selection and target evaluation.",
       any, true, deep},
      {"reinforce", "REINFORCE", "Monte-Carlo policy gradient with a mean-return baseline.",
       any, false, policy},
      {"ppo", "PPO", "Clipped-surrogate policy optimization with a separate value net.",
       any, false, policy},
      {"drqn", "DRQN", "GRU Q-network trained on replayed sequences.",
       any, true, recurrent},
      {"adrqn", "ADRQN", "DRQN whose input also carries the previous action.",
       any, true, recurrent},
  };
}

}  // namespace

const std::vector<AgentDescriptor>& builtinAgents() {
  static const std::vector<AgentDescriptor> agents = makeDescriptors();
  return agents;
}

const AgentDescriptor* findBuiltinAgent(const std::string& id) {
  for (const auto& d : builtinAgents()) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::unique_ptr<Agent> createBuiltinAgent(const std::string& id, const EnvDescriptor& env,
                                          const Hyperparameters& hp) {
  const AgentDescriptor* d = findBuiltinAgent(id);
  if (!d) fail(ErrorCode::NotFound, "unknown agent '" + id + "'");
  if (!d->supports(env.obsKind)) {
    fail(ErrorCode::Incompatible, "agent '" + id + "' does not support the observations of '" +
                                      env.id + "'");
  }
  hp.validate();
  if (id == "qlearning") return std::make_unique<TabularAgent>(TabularAgent::Rule::QLearning, env, hp);
  if (id == "sarsa") return std::make_unique<TabularAgent>(TabularAgent::Rule::Sarsa, env, hp);
  if (id == "dqn") return std::make_unique<QNetworkAgent>(QNetworkAgent::Variant::Dqn, env, hp);
  if (id == "ddqn") return std::make_unique<QNetworkAgent>(QNetworkAgent::Variant::Ddqn, env, hp);
  if (id == "reinforce") return std::make_unique<ReinforceAgent>(env, hp);
  if (id == "ppo") return std::make_unique<PpoAgent>(env, hp);
  if (id == "drqn") {
    return std::make_unique<RecurrentQAgent>(RecurrentQAgent::Encoding::Observation, env, hp);
  }
  return std::make_unique<RecurrentQAgent>(RecurrentQAgent::Encoding::ActionConditioned, env, hp);
}

}  // namespace easyrl::agents
