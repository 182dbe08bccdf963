#pragma once

#include <memory>
#include <string>
#include <vector>

#include "easyrl/agents/agent.hpp"

namespace easyrl::agents {

// qlearning, sarsa, dqn, ddqn, reinforce, ppo, drqn, adrqn
const std::vector<AgentDescriptor>& builtinAgents();

// nullptr when id is not a built-in agent.
const AgentDescriptor* findBuiltinAgent(const std::string& id);

std::unique_ptr<Agent> createBuiltinAgent(const std::string& id, const EnvDescriptor& env,
                                          const Hyperparameters& hp);

}  // namespace easyrl::agents
