#include "easyrl/engine/catalog.hpp"

#include "easyrl/agents/builtin.hpp"
#include "easyrl/common/error.hpp"
#include "easyrl/env/builtin.hpp"

namespace easyrl::engine {
namespace {

const env::EnvFactory* findBuiltinEnv(const std::string& id) {
  for (const auto& f : env::builtinEnvironments()) {
    if (f.descriptor.id == id) return &f;
  }
  return nullptr;
}

}  // namespace

void checkCompatible(const agents::AgentDescriptor& agent, const env::EnvDescriptor& env) {
  if (!agent.supports(env.obsKind)) {
    fail(ErrorCode::Incompatible, "agent '" + agent.id + "' cannot handle the " +
                                      env::toString(env.obsKind) + " observations of '" +
                                      env.id + "'");
  }
}

std::vector<env::EnvDescriptor> Catalog::environments() const {
  std::vector<env::EnvDescriptor> out;
  for (const auto& f : env::builtinEnvironments()) out.push_back(f.descriptor);
  std::lock_guard lock(mu_);
  for (const auto& [id, p] : envPlugins_) out.push_back(p.descriptor);
  return out;
}

std::vector<agents::AgentDescriptor> Catalog::agents() const {
  std::vector<agents::AgentDescriptor> out = agents::builtinAgents();
  std::lock_guard lock(mu_);
  for (const auto& [id, p] : agentPlugins_) out.push_back(p.descriptor);
  return out;
}

env::EnvDescriptor Catalog::environment(const std::string& id) const {
  if (const auto* f = findBuiltinEnv(id)) return f->descriptor;
  std::lock_guard lock(mu_);
  auto it = envPlugins_.find(id);
  if (it == envPlugins_.end()) fail(ErrorCode::NotFound, "unknown environment '" + id + "'");
  return it->second.descriptor;
}

agents::AgentDescriptor Catalog::agent(const std::string& id) const {
  if (const auto* d = agents::findBuiltinAgent(id)) return *d;
  std::lock_guard lock(mu_);
  auto it = agentPlugins_.find(id);
  if (it == agentPlugins_.end()) fail(ErrorCode::NotFound, "unknown agent '" + id + "'");
  return it->second.descriptor;
}

std::string Catalog::registerPlugin(const plugin::PluginSpec& spec) {
  plugin::PluginHandle probe(spec);
  if (spec.kind == plugin::PluginKind::Environment) {
    auto d = plugin::envDescriptorFromPlugin(probe.descriptor());
    if (findBuiltinEnv(d.id)) {
      fail(ErrorCode::Argument, "plugin id '" + d.id + "' collides with a built-in environment");
    }
    std::lock_guard lock(mu_);
    envPlugins_[d.id] = {d, spec};
    return d.id;
  }
  auto d = plugin::agentDescriptorFromPlugin(probe.descriptor());
  if (agents::findBuiltinAgent(d.id)) {
    fail(ErrorCode::Argument, "plugin id '" + d.id + "' collides with a built-in agent");
  }
  std::lock_guard lock(mu_);
  agentPlugins_[d.id] = {d, spec};
  return d.id;
}

std::unique_ptr<env::Environment> Catalog::createEnvironment(const std::string& id) const {
  if (const auto* f = findBuiltinEnv(id)) return f->create();
  plugin::PluginSpec spec;
  {
    std::lock_guard lock(mu_);
    auto it = envPlugins_.find(id);
    if (it == envPlugins_.end()) fail(ErrorCode::NotFound, "unknown environment '" + id + "'");
    spec = it->second.spec;
  }
  return std::make_unique<plugin::PluginEnvironment>(spec);
}

std::unique_ptr<agents::Agent> Catalog::createAgent(const std::string& id,
                                                    const env::EnvDescriptor& env,
                                                    const agents::Hyperparameters& hp) const {
  if (agents::findBuiltinAgent(id)) return agents::createBuiltinAgent(id, env, hp);
  plugin::PluginSpec spec;
  {
    std::lock_guard lock(mu_);
    auto it = agentPlugins_.find(id);
    if (it == agentPlugins_.end()) fail(ErrorCode::NotFound, "unknown agent '" + id + "'");
    spec = it->second.spec;
  }
  hp.validate();
  return std::make_unique<plugin::PluginAgent>(spec, env, hp);
}

}  // namespace easyrl::engine
