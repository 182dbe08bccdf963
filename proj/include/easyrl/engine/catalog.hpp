#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "easyrl/agents/agent.hpp"
#include "easyrl/env/environment.hpp"
#include "easyrl/plugin/plugin.hpp"

namespace easyrl::engine {

// Resolves environment and agent ids: the built-ins plus any registered
// plugins. Safe for concurrent use.
class Catalog {
 public:
  std::vector<env::EnvDescriptor> environments() const;
  std::vector<agents::AgentDescriptor> agents() const;

  // NotFound for unknown ids.
  env::EnvDescriptor environment(const std::string& id) const;
  agents::AgentDescriptor agent(const std::string& id) const;

  // Handshakes once to learn the descriptor, then records the command.
  // Returns the id the plugin declared. Built-in ids cannot be shadowed.
  std::string registerPlugin(const plugin::PluginSpec& spec);

  std::unique_ptr<env::Environment> createEnvironment(const std::string& id) const;
  std::unique_ptr<agents::Agent> createAgent(const std::string& id, const env::EnvDescriptor& env,
                                             const agents::Hyperparameters& hp) const;

 private:
  struct EnvPlugin {
    env::EnvDescriptor descriptor;
    plugin::PluginSpec spec;
  };
  struct AgentPlugin {
    agents::AgentDescriptor descriptor;
    plugin::PluginSpec spec;
  };

  mutable std::mutex mu_;
  std::map<std::string, EnvPlugin> envPlugins_;
  std::map<std::string, AgentPlugin> agentPlugins_;
};

// Incompatible unless the agent accepts the env's observation kind.
void checkCompatible(const agents::AgentDescriptor& agent, const env::EnvDescriptor& env);

}  // namespace easyrl::engine
