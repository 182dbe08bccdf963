#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace easyrl::env {

using Json = nlohmann::json;

// Structured render snapshot; layout identified by EnvDescriptor::renderSchema.
using Frame = Json;

struct ObsKind {
  enum class Type { Discrete, Continuous };
  Type type = Type::Continuous;
  std::size_t size = 1;  // state count for discrete, vector length otherwise

  static ObsKind discrete(std::size_t n) { return {Type::Discrete, n}; }
  static ObsKind continuous(std::size_t dim) { return {Type::Continuous, dim}; }
  bool isDiscrete() const { return type == Type::Discrete; }

  friend bool operator==(const ObsKind&, const ObsKind&) = default;
};

std::string toString(const ObsKind& kind);

struct EnvDescriptor {
  std::string id;
  ObsKind obsKind;
  std::size_t actionCount = 2;
  std::size_t maxEpisodeSteps = 1;
  bool partiallyObservable = false;
  std::string renderSchema;

  // Throws a validation error if actionCount < 2, maxEpisodeSteps < 1, etc.
  void validate() const;

  friend bool operator==(const EnvDescriptor&, const EnvDescriptor&) = default;
};

// Either a state index or a real vector.
class Observation {
 public:
  Observation() = default;
  static Observation discrete(std::size_t index);
  static Observation continuous(std::vector<double> values);

  bool isDiscrete() const { return discrete_; }
  std::size_t index() const;
  std::span<const double> values() const { return values_; }

  // True if the observation has the shape declared by kind.
  bool conforms(const ObsKind& kind) const;
  bool allFinite() const;

  friend bool operator==(const Observation&, const Observation&) = default;

 private:
  bool discrete_ = false;
  std::size_t index_ = 0;
  std::vector<double> values_;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

struct Transition {
  Observation observation;
  std::size_t action = 0;
  double reward = 0.0;
  Observation nextObservation;
  bool done = false;
};

void to_json(Json& j, const ObsKind& kind);
void from_json(const Json& j, ObsKind& kind);
void to_json(Json& j, const EnvDescriptor& d);
void from_json(const Json& j, EnvDescriptor& d);
// Discrete observations are encoded as an integer, continuous ones as an array.
void to_json(Json& j, const Observation& obs);
Observation observationFromJson(const Json& j);
void to_json(Json& j, const Transition& t);

}  // namespace easyrl::env
