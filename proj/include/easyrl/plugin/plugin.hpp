#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "easyrl/agents/agent.hpp"
#include "easyrl/common/error.hpp"
#include "easyrl/env/environment.hpp"
#include "easyrl/plugin/process.hpp"

namespace easyrl::plugin {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultTimeout{10000};

enum class PluginKind { Environment, Agent };

std::string_view toString(PluginKind kind);
// Accepts "environment"/"env" and "agent".
PluginKind pluginKindFromString(std::string_view name);

struct PluginSpec {
  PluginKind kind = PluginKind::Environment;
  std::vector<std::string> command;
  std::chrono::milliseconds timeout = kDefaultTimeout;
};

// One live plugin process after a successful handshake. Requests strictly
// alternate with responses; any failure kills the process and invalidates
// the handle.
class PluginHandle {
 public:
  // Sends hello (plus any extra fields) and waits for hello_ok.
  PluginHandle(const PluginSpec& spec, const Json& helloExtra = Json::object());

  PluginKind kind() const { return spec_.kind; }
  int protocol() const { return protocol_; }
  const Json& descriptor() const { return descriptor_; }
  bool alive() const { return alive_; }

  // Writes one request line and returns the parsed reply, which must carry
  // "type": expectedType. A reply of type "error" surfaces as a contract
  // violation carrying the plugin's message.
  Json request(const Json& message, std::string_view expectedType);

  // Raises a contract violation and kills the process.
  [[noreturn]] void violation(const std::string& message);

 private:
  Json readReply(std::string_view expectedType, const std::string& what);
  [[noreturn]] void die(ErrorCode code, const std::string& message);

  PluginSpec spec_;
  std::unique_ptr<ChildProcess> process_;
  Json descriptor_;
  int protocol_ = 0;
  bool alive_ = false;
};

// Parses a JSON line, raising PluginParse with the byte offset and the
// offending line quoted.
Json parsePluginLine(const std::string& line);

env::EnvDescriptor envDescriptorFromPlugin(const Json& descriptor);
agents::AgentDescriptor agentDescriptorFromPlugin(const Json& descriptor);

class PluginEnvironment : public env::Environment {
 public:
  explicit PluginEnvironment(const PluginSpec& spec);

  const env::EnvDescriptor& descriptor() const override { return descriptor_; }

 protected:
  env::StepResult doReset(std::optional<std::uint64_t> seed) override;
  env::StepResult doStep(std::size_t action) override;
  env::Frame doRender() override;

 private:
  env::StepResult readObs(const Json& reply);

  PluginHandle handle_;
  env::EnvDescriptor descriptor_;
};

class PluginAgent : public agents::Agent {
 public:
  PluginAgent(const PluginSpec& spec, const env::EnvDescriptor& env,
              const agents::Hyperparameters& hp);

  const std::string& id() const override { return id_; }
  std::size_t chooseAction(const env::Observation& observation, agents::Mode mode) override;
  void observe(const env::Transition& transition) override;
  std::optional<double> update() override;
  std::vector<agents::WeightSection> serialize() const override;
  void deserialize(const std::vector<agents::WeightSection>& sections) override;

  const agents::AgentDescriptor& agentDescriptor() const { return descriptor_; }

 private:
  // serialize() is const in the agent contract but talks to the process.
  mutable PluginHandle handle_;
  agents::AgentDescriptor descriptor_;
  env::EnvDescriptor env_;
  std::string id_;
};

inline constexpr const char* kPluginBlobSection = "plugin.blob";

}  // namespace easyrl::plugin
