#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "easyrl/agents/hyperparameters.hpp"
#include "easyrl/env/types.hpp"
#include "easyrl/nn/dense_net.hpp"
#include "easyrl/nn/gru.hpp"

namespace easyrl::agents {

using env::EnvDescriptor;
using env::Observation;
using env::Transition;

enum class Mode { Train, Test };

std::string_view toString(Mode mode);
Mode modeFromString(std::string_view name);

struct AgentDescriptor {
  std::string id;
  std::string displayName;
  std::string description;
  std::vector<env::ObsKind::Type> supportedObsKinds;
  bool usesEpsilon = false;
  Hyperparameters defaults;

  bool supports(const env::ObsKind& kind) const;
};

void to_json(nlohmann::json& j, const AgentDescriptor& d);
void from_json(const nlohmann::json& j, AgentDescriptor& d);

// A named block of persisted agent state: either f64 values with a shape,
// or an opaque byte blob (plugin agents).
struct WeightSection {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool opaque = false;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const WeightSection&, const WeightSection&) = default;
};

// Common contract for built-in and plugin agents. The engine drives it as
//   beginEpisode, then per step: chooseAction, observe, update,
//   and endEpisode followed by one more update at the episode boundary.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual const std::string& id() const = 0;

  virtual void beginEpisode() {}
  virtual std::size_t chooseAction(const Observation& observation, Mode mode) = 0;
  virtual void observe(const Transition& transition) = 0;
  // Runs a learning step when the agent's cadence calls for one.
  virtual std::optional<double> update() = 0;
  virtual void endEpisode() {}

  // Current exploration rate, for agents that have one.
  virtual std::optional<double> epsilon() const { return std::nullopt; }

  virtual std::vector<WeightSection> serialize() const = 0;
  virtual void deserialize(const std::vector<WeightSection>& sections) = 0;
};

// Flattens observations into network input: one-hot for discrete states,
// a copy for continuous vectors.
class ObservationEncoder {
 public:
  explicit ObservationEncoder(const env::ObsKind& kind) : kind_(kind) {}

  std::size_t width() const { return kind_.size; }
  void encode(const Observation& obs, std::span<double> out) const;
  std::vector<double> encode(const Observation& obs) const;

 private:
  env::ObsKind kind_;
};

// Helpers for WeightSection bookkeeping shared by the built-in agents.
void appendNet(std::vector<WeightSection>& out, const std::string& prefix,
               const nn::DenseNet& net);
void appendGru(std::vector<WeightSection>& out, const std::string& prefix,
               const nn::GruCell& cell);
void restoreNet(const std::vector<WeightSection>& sections,
                const std::string& prefix, nn::DenseNet& net);
void restoreGru(const std::vector<WeightSection>& sections,
                const std::string& prefix, nn::GruCell& cell);
const WeightSection& findSection(const std::vector<WeightSection>& sections,
                                 const std::string& name);
void restoreTensor(const WeightSection& section, nn::Tensor& tensor);

}  // namespace easyrl::agents
