#include "easyrl/plugin/plugin.hpp"

#include <thread>

#include "easyrl/common/base64.hpp"

namespace easyrl::plugin {
namespace {

std::string quote(const std::string& line) {
  constexpr std::size_t kMax = 200;
  if (line.size() <= kMax) return "'" + line + "'";
  return "'" + line.substr(0, kMax) + "...'";
}

}  // namespace

std::string_view toString(PluginKind kind) {
  return kind == PluginKind::Environment ? "environment" : "agent";
}

PluginKind pluginKindFromString(std::string_view name) {
  if (name == "environment" || name == "env") return PluginKind::Environment;
  if (name == "agent") return PluginKind::Agent;
  fail(ErrorCode::Argument, "plugin kind must be 'environment' or 'agent', got '" +
                                std::string(name) + "'");
}

Json parsePluginLine(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::PluginParse, "malformed JSON from plugin at offset " +
                                     std::to_string(e.byte == 0 ? 0 : e.byte - 1) +
                                     ": " + quote(line));
  }
  if (!j.is_object()) fail(ErrorCode::PluginParse, "plugin reply is not a JSON object: " + quote(line));
  if (!j.contains("type") || !j["type"].is_string()) {
    fail(ErrorCode::PluginParse, "plugin reply has no string \"type\": " + quote(line));
  }
  return j;
}

env::EnvDescriptor envDescriptorFromPlugin(const Json& descriptor) {
  try {
    env::EnvDescriptor d = descriptor.get<env::EnvDescriptor>();
    d.validate();
    return d;
  } catch (const std::exception& e) {
    fail(ErrorCode::PluginContract, std::string("invalid environment descriptor: ") + e.what());
  }
}

agents::AgentDescriptor agentDescriptorFromPlugin(const Json& descriptor) {
  try {
    return descriptor.get<agents::AgentDescriptor>();
  } catch (const std::exception& e) {
    fail(ErrorCode::PluginContract, std::string("invalid agent descriptor: ") + e.what());
  }
}

PluginHandle::PluginHandle(const PluginSpec& spec, const Json& helloExtra) : spec_(spec) {
  process_ = std::make_unique<ChildProcess>(spec.command);
  alive_ = true;
  Json hello = {{"type", "hello"}, {"protocol", kProtocolVersion}, {"kind", toString(spec.kind)}};
  for (const auto& [k, v] : helloExtra.items()) hello[k] = v;
  if (!process_->writeLine(hello.dump())) die(ErrorCode::PluginDeath, "plugin exited before hello");
  Json reply = readReply("hello_ok", "hello");
  if (!reply.contains("protocol") || !reply["protocol"].is_number_integer()) {
    die(ErrorCode::PluginContract, "hello_ok without integer protocol: " + quote(reply.dump()));
  }
  protocol_ = reply["protocol"].get<int>();
  if (protocol_ != kProtocolVersion) {
    die(ErrorCode::PluginVersion, "plugin speaks protocol " + std::to_string(protocol_) +
                                      ", host speaks " + std::to_string(kProtocolVersion) + ": " +
                                      quote(reply.dump()));
  }
  if (!reply.contains("descriptor") || !reply["descriptor"].is_object()) {
    die(ErrorCode::PluginContract, "hello_ok without descriptor object: " + quote(reply.dump()));
  }
  descriptor_ = reply["descriptor"];
  try {
    if (spec.kind == PluginKind::Environment) {
      envDescriptorFromPlugin(descriptor_);
    } else {
      agentDescriptorFromPlugin(descriptor_);
    }
  } catch (const Error& e) {
    die(e.code(), e.what());
  }
}

Json PluginHandle::request(const Json& message, std::string_view expectedType) {
  if (!alive_) fail(ErrorCode::PluginDeath, "plugin handle is no longer usable");
  const std::string what = message.value("type", std::string("request"));
  if (!process_->writeLine(message.dump())) {
    die(ErrorCode::PluginDeath, "plugin exited before '" + what + "' could be sent");
  }
  return readReply(expectedType, what);
}

void PluginHandle::violation(const std::string& message) { die(ErrorCode::PluginContract, message); }

Json PluginHandle::readReply(std::string_view expectedType, const std::string& what) {
  std::string line;
  switch (process_->readLine(line, spec_.timeout)) {
    case ChildProcess::ReadStatus::Timeout:
      die(ErrorCode::PluginTimeout, "plugin did not answer '" + what + "' within " +
                                        std::to_string(spec_.timeout.count()) + " ms");
    case ChildProcess::ReadStatus::Closed: {
      std::optional<int> status;
      for (int i = 0; i < 50 && !(status = process_->poll()); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      die(ErrorCode::PluginDeath,
          "plugin exited while '" + what + "' was pending" +
              (status ? " (status " + std::to_string(*status) + ")" : std::string()));
    }
    case ChildProcess::ReadStatus::Line:
      break;
  }
  Json reply;
  try {
    reply = parsePluginLine(line);
  } catch (const Error& e) {
    die(e.code(), e.what());
  }
  const auto type = reply["type"].get<std::string>();
  if (type == "error") {
    die(ErrorCode::PluginContract,
        "plugin reported an error for '" + what + "': " + reply.value("message", std::string("?")));
  }
  if (type != expectedType) {
    die(ErrorCode::PluginContract, "expected '" + std::string(expectedType) + "' reply to '" +
                                       what + "', got " + quote(line));
  }
  return reply;
}

void PluginHandle::die(ErrorCode code, const std::string& message) {
  alive_ = false;
  if (process_) process_->kill();
  fail(code, message);
}

namespace {
PluginSpec withKind(PluginSpec spec, PluginKind kind) {
  spec.kind = kind;
  return spec;
}
}  // namespace

PluginEnvironment::PluginEnvironment(const PluginSpec& spec)
    : handle_(withKind(spec, PluginKind::Environment)),
      descriptor_(envDescriptorFromPlugin(handle_.descriptor())) {}

env::StepResult PluginEnvironment::readObs(const Json& reply) {
  env::StepResult r;
  try {
    r.observation = env::observationFromJson(reply.at("observation"));
  } catch (const std::exception& e) {
    handle_.violation(std::string("bad observation: ") + e.what());
  }
  if (!r.observation.conforms(descriptor_.obsKind)) {
    const std::string got = r.observation.isDiscrete()
                                ? "state " + std::to_string(r.observation.index())
                                : std::to_string(r.observation.values().size()) + "-dim vector";
    handle_.violation("observation does not match declared " + env::toString(descriptor_.obsKind) +
                      ": got " + got);
  }
  const Json reward = reply.value("reward", Json(0.0));
  const Json done = reply.value("done", Json(false));
  if (!reward.is_number() || !done.is_boolean()) {
    handle_.violation("obs reply needs numeric reward and boolean done: " + reply.dump());
  }
  r.reward = reward.get<double>();
  r.done = done.get<bool>();
  return r;
}

env::StepResult PluginEnvironment::doReset(std::optional<std::uint64_t> seed) {
  Json msg = {{"type", "reset"}, {"seed", seed ? Json(*seed) : Json(nullptr)}};
  return readObs(handle_.request(msg, "obs"));
}

env::StepResult PluginEnvironment::doStep(std::size_t action) {
  return readObs(handle_.request({{"type", "step"}, {"action", action}}, "obs"));
}

env::Frame PluginEnvironment::doRender() {
  return handle_.request({{"type", "render"}}, "frame").value("frame", Json(nullptr));
}

PluginAgent::PluginAgent(const PluginSpec& spec, const env::EnvDescriptor& env,
                         const agents::Hyperparameters& hp)
    : handle_(withKind(spec, PluginKind::Agent), Json{{"env", env}, {"hyperparameters", hp}}),
      descriptor_(agentDescriptorFromPlugin(handle_.descriptor())),
      env_(env),
      id_(descriptor_.id) {
  if (!descriptor_.supports(env.obsKind)) {
    fail(ErrorCode::Incompatible, "agent '" + id_ + "' does not support " +
                                      env::toString(env.obsKind) + " observations of '" +
                                      env.id + "'");
  }
}

std::size_t PluginAgent::chooseAction(const env::Observation& observation, agents::Mode mode) {
  Json reply = handle_.request(
      {{"type", "chooseAction"}, {"observation", observation}, {"mode", agents::toString(mode)}},
      "action");
  const Json a = reply.value("action", Json(nullptr));
  if (!a.is_number_integer() || a.get<long long>() < 0 ||
      a.get<unsigned long long>() >= env_.actionCount) {
    handle_.violation("action " + a.dump() + " outside [0, " + std::to_string(env_.actionCount) +
                      ")");
  }
  return a.get<std::size_t>();
}

void PluginAgent::observe(const env::Transition& transition) {
  handle_.request({{"type", "observe"}, {"transition", transition}}, "ok");
}

std::optional<double> PluginAgent::update() {
  Json reply = handle_.request({{"type", "update"}}, "updated");
  if (!reply.contains("loss") || reply["loss"].is_null()) return std::nullopt;
  if (!reply["loss"].is_number()) handle_.violation("loss must be a number: " + reply.dump());
  return reply["loss"].get<double>();
}

std::vector<agents::WeightSection> PluginAgent::serialize() const {
  Json reply = handle_.request({{"type", "save"}}, "saved");
  if (!reply.contains("blob") || !reply["blob"].is_string()) {
    handle_.violation("saved reply without string blob");
  }
  agents::WeightSection s;
  s.name = kPluginBlobSection;
  s.opaque = true;
  try {
    s.bytes = base64Decode(reply["blob"].get<std::string>());
  } catch (const Error& e) {
    handle_.violation(std::string("saved blob: ") + e.what());
  }
  return {s};
}

void PluginAgent::deserialize(const std::vector<agents::WeightSection>& sections) {
  const auto& s = agents::findSection(sections, kPluginBlobSection);
  handle_.request({{"type", "load"}, {"blob", base64Encode(s.bytes)}}, "ok");
}

}  // namespace easyrl::plugin
