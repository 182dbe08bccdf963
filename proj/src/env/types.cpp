#include "easyrl/env/types.hpp"

#include <algorithm>
#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::env {

std::string toString(const ObsKind& kind) {
  return (kind.isDiscrete() ? "discrete(" : "continuous(") +
         std::to_string(kind.size) + ")";
}

void EnvDescriptor::validate() const {
  if (id.empty()) fail(ErrorCode::Validation, "environment descriptor: id must not be empty");
  if (actionCount < 2) fail(ErrorCode::Validation, "environment descriptor: actionCount must be >= 2");
  if (maxEpisodeSteps < 1) fail(ErrorCode::Validation, "environment descriptor: maxEpisodeSteps must be >= 1");
  if (obsKind.size < 1) fail(ErrorCode::Validation, "environment descriptor: observation size must be >= 1");
}

Observation Observation::discrete(std::size_t index) {
  Observation obs;
  obs.discrete_ = true;
  obs.index_ = index;
  return obs;
}

Observation Observation::continuous(std::vector<double> values) {
  Observation obs;
  obs.values_ = std::move(values);
  return obs;
}

std::size_t Observation::index() const {
  if (!discrete_) fail(ErrorCode::Contract, "observation is not discrete");
  return index_;
}

bool Observation::conforms(const ObsKind& kind) const {
  if (kind.isDiscrete()) return discrete_ && index_ < kind.size;
  return !discrete_ && values_.size() == kind.size;
}

bool Observation::allFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void to_json(Json& j, const ObsKind& kind) {
  if (kind.isDiscrete()) {
    j = Json{{"type", "discrete"}, {"n", kind.size}};
  } else {
    j = Json{{"type", "continuous"}, {"dim", kind.size}};
  }
}

void from_json(const Json& j, ObsKind& kind) {
  const auto type = j.at("type").get<std::string>();
  if (type == "discrete") {
    kind = ObsKind::discrete(j.at("n").get<std::size_t>());
  } else if (type == "continuous") {
    kind = ObsKind::continuous(j.at("dim").get<std::size_t>());
  } else {
    fail(ErrorCode::Validation, "unknown obsKind type '" + type + "'");
  }
}

void to_json(Json& j, const EnvDescriptor& d) {
  j = Json{{"id", d.id},
           {"obsKind", d.obsKind},
           {"actionCount", d.actionCount},
           {"maxEpisodeSteps", d.maxEpisodeSteps},
           {"partiallyObservable", d.partiallyObservable},
           {"renderSchema", d.renderSchema}};
}

void from_json(const Json& j, EnvDescriptor& d) {
  d.id = j.at("id").get<std::string>();
  d.obsKind = j.at("obsKind").get<ObsKind>();
  d.actionCount = j.at("actionCount").get<std::size_t>();
  d.maxEpisodeSteps = j.at("maxEpisodeSteps").get<std::size_t>();
  d.partiallyObservable = j.value("partiallyObservable", false);
  d.renderSchema = j.value("renderSchema", std::string("raw"));
}

void to_json(Json& j, const Observation& obs) {
  if (obs.isDiscrete()) {
    j = obs.index();
  } else {
    j = Json::array();
    for (double v : obs.values()) j.push_back(v);
  }
}

Observation observationFromJson(const Json& j) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)) {
    return Observation::discrete(j.get<std::size_t>());
  }
  if (j.is_array()) {
    std::vector<double> values;
    values.reserve(j.size());
    for (const auto& v : j) {
      if (!v.is_number()) fail(ErrorCode::Validation, "observation entries must be numbers");
      values.push_back(v.get<double>());
    }
    return Observation::continuous(std::move(values));
  }
  fail(ErrorCode::Validation, "observation must be a non-negative integer or an array of numbers");
}

void to_json(Json& j, const Transition& t) {
  j = Json{{"observation", t.observation},
           {"action", t.action},
           {"reward", t.reward},
           {"nextObservation", t.nextObservation},
           {"done", t.done}};
}

}  // namespace easyrl::env
