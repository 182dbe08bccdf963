#include "easyrl/agents/agent.hpp"

#include <algorithm>

#include "easyrl/common/error.hpp"

namespace easyrl::agents {

using Json = nlohmann::json;

std::string_view toString(Mode mode) { return mode == Mode::Train ? "train" : "test"; }

Mode modeFromString(std::string_view name) {
  if (name == "train") return Mode::Train;
  if (name == "test") return Mode::Test;
  fail(ErrorCode::Validation, "mode must be 'train' or 'test'");
}

bool AgentDescriptor::supports(const env::ObsKind& kind) const {
  return std::find(supportedObsKinds.begin(), supportedObsKinds.end(), kind.type) !=
         supportedObsKinds.end();
}

void to_json(Json& j, const AgentDescriptor& d) {
  Json kinds = Json::array();
  for (auto k : d.supportedObsKinds) {
    kinds.push_back(k == env::ObsKind::Type::Discrete ? "discrete" : "continuous");
  }
  j = Json{{"id", d.id},
           {"displayName", d.displayName},
           {"description", d.description},
           {"supportedObsKinds", kinds},
           {"usesEpsilon", d.usesEpsilon},
           {"defaultHyperparameters", d.defaults},
           {"tooltips", Hyperparameters::tooltips()}};
}

void from_json(const Json& j, AgentDescriptor& d) {
  d.id = j.at("id").get<std::string>();
  d.displayName = j.value("displayName", d.id);
  d.description = j.value("description", std::string());
  d.supportedObsKinds.clear();
  for (const auto& k : j.at("supportedObsKinds")) {
    const auto name = k.get<std::string>();
    if (name == "discrete") {
      d.supportedObsKinds.push_back(env::ObsKind::Type::Discrete);
    } else if (name == "continuous") {
      d.supportedObsKinds.push_back(env::ObsKind::Type::Continuous);
    } else {
      fail(ErrorCode::Validation, "unknown obs kind '" + name + "'");
    }
  }
  d.usesEpsilon = j.value("usesEpsilon", false);
  if (j.contains("defaultHyperparameters")) applyJson(d.defaults, j["defaultHyperparameters"]);
}

void ObservationEncoder::encode(const Observation& obs, std::span<double> out) const {
  if (!obs.conforms(kind_)) {
    fail(ErrorCode::Shape, "observation does not match " + env::toString(kind_));
  }
  if (kind_.isDiscrete()) {
    std::fill(out.begin(), out.end(), 0.0);
    out[obs.index()] = 1.0;
  } else {
    std::copy(obs.values().begin(), obs.values().end(), out.begin());
  }
}

std::vector<double> ObservationEncoder::encode(const Observation& obs) const {
  std::vector<double> out(width());
  encode(obs, out);
  return out;
}

const WeightSection& findSection(const std::vector<WeightSection>& sections,
                                 const std::string& name) {
  for (const auto& s : sections) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::Format, "model is missing weight section '" + name + "'");
}

void restoreTensor(const WeightSection& section, nn::Tensor& tensor) {
  if (section.opaque || section.shape != tensor.shape() ||
      section.values.size() != tensor.size()) {
    fail(ErrorCode::Incompatible, "weight section '" + section.name + "' has shape " +
                                      nn::shapeString(section.shape) + ", expected " +
                                      nn::shapeString(tensor.shape()));
  }
  std::copy(section.values.begin(), section.values.end(), tensor.data().begin());
}

void appendNet(std::vector<WeightSection>& out, const std::string& prefix,
               const nn::DenseNet& net) {
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const auto& layer = net.layers()[k];
    const std::string base = prefix + ".layer" + std::to_string(k);
    out.push_back({base + ".weight", layer.weight.shape(), layer.weight.values(), false, {}});
    out.push_back({base + ".bias", layer.bias.shape(), layer.bias.values(), false, {}});
  }
}

void restoreNet(const std::vector<WeightSection>& sections, const std::string& prefix,
                nn::DenseNet& net) {
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    auto& layer = net.layers()[k];
    const std::string base = prefix + ".layer" + std::to_string(k);
    restoreTensor(findSection(sections, base + ".weight"), layer.weight);
    restoreTensor(findSection(sections, base + ".bias"), layer.bias);
  }
}

namespace {
const char* const kGruNames[] = {"update.weight", "update.bias", "reset.weight",
                                 "reset.bias",    "candidate.weight", "candidate.bias"};
}

void appendGru(std::vector<WeightSection>& out, const std::string& prefix,
               const nn::GruCell& cell) {
  const auto params = cell.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back({prefix + "." + kGruNames[i], params[i]->shape(), params[i]->values(),
                   false, {}});
  }
}

void restoreGru(const std::vector<WeightSection>& sections, const std::string& prefix,
                nn::GruCell& cell) {
  const auto params = cell.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    restoreTensor(findSection(sections, prefix + "." + kGruNames[i]), *params[i]);
  }
}

}  // namespace easyrl::agents
