#include "easyrl/agents/hyperparameters.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include "easyrl/common/error.hpp"

namespace easyrl::agents {
namespace {

using Json = nlohmann::json;

[[noreturn]] void invalid(const std::string& message) {
  fail(ErrorCode::Validation, message);
}

std::string validKeyList() {
  std::string out;
  for (const auto& key : Hyperparameters::keys()) {
    if (!out.empty()) out += ", ";
    out += key;
  }
  return out;
}

[[noreturn]] void unknownKey(std::string_view key) {
  invalid("unknown hyperparameter '" + std::string(key) +
          "'; valid keys: " + validKeyList());
}

double parseReal(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    invalid(std::string(key) + " must be a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parseCount(std::string_view key, std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    invalid(std::string(key) + " must be a non-negative integer, got '" +
            std::string(text) + "'");
  }
  return value;
}

std::vector<std::size_t> parseWidths(std::string_view key, std::string_view text) {
  std::vector<std::size_t> widths;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto part = text.substr(0, comma);
    widths.push_back(parseCount(key, part));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return widths;
}

void requireCount(const char* name, std::size_t value) {
  if (value < 1) invalid(std::string(name) + " must be >= 1");
}

void requireUnit(const char* name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) invalid(std::string(name) + " must be in [0,1]");
}

struct Field {
  std::function<void(Hyperparameters&, std::string_view)> parse;
  std::function<void(Hyperparameters&, const Json&)> fromJson;
};

template <typename T>
Field realField(T Hyperparameters::*member) {
  return Field{
      [member](Hyperparameters& hp, std::string_view v) { hp.*member = parseReal("", v); },
      [member](Hyperparameters& hp, const Json& j) {
        if (!j.is_number()) invalid("expected a number");
        hp.*member = j.get<double>();
      }};
}

template <typename T>
Field countField(T Hyperparameters::*member) {
  return Field{
      [member](Hyperparameters& hp, std::string_view v) {
        hp.*member = static_cast<T>(parseCount("", v));
      },
      [member](Hyperparameters& hp, const Json& j) {
        if (!j.is_number_integer() || j.get<long long>() < 0) {
          invalid("expected a non-negative integer");
        }
        hp.*member = j.get<T>();
      }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"gamma", realField(&Hyperparameters::gamma)},
      {"learningRate", realField(&Hyperparameters::learningRate)},
      {"epsilonStart", realField(&Hyperparameters::epsilonStart)},
      {"epsilonEnd", realField(&Hyperparameters::epsilonEnd)},
      {"epsilonDecaySteps", countField(&Hyperparameters::epsilonDecaySteps)},
      {"batchSize", countField(&Hyperparameters::batchSize)},
      {"bufferCapacity", countField(&Hyperparameters::bufferCapacity)},
      {"targetSyncInterval", countField(&Hyperparameters::targetSyncInterval)},
      {"updateEvery", countField(&Hyperparameters::updateEvery)},
      {"hiddenLayers",
       Field{[](Hyperparameters& hp, std::string_view v) {
               hp.hiddenLayers = parseWidths("hiddenLayers", v);
             },
             [](Hyperparameters& hp, const Json& j) {
               if (!j.is_array()) invalid("hiddenLayers must be an array of widths");
               hp.hiddenLayers.clear();
               for (const auto& w : j) {
                 if (!w.is_number_integer() || w.get<long long>() < 0) {
                   invalid("hiddenLayers must be an array of widths");
                 }
                 hp.hiddenLayers.push_back(w.get<std::size_t>());
               }
             }}},
      {"recurrentHidden", countField(&Hyperparameters::recurrentHidden)},
      {"seqLen", countField(&Hyperparameters::seqLen)},
      {"clipEpsilon", realField(&Hyperparameters::clipEpsilon)},
      {"ppoEpochs", countField(&Hyperparameters::ppoEpochs)},
      {"rolloutSteps", countField(&Hyperparameters::rolloutSteps)},
      {"episodes", countField(&Hyperparameters::episodes)},
      {"maxStepsPerEpisode", countField(&Hyperparameters::maxStepsPerEpisode)},
      {"seed", countField(&Hyperparameters::seed)},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& Hyperparameters::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, field] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

const std::map<std::string, std::string>& Hyperparameters::tooltips() {
  static const std::map<std::string, std::string> text = {
      {"gamma", "Discount factor: how much future rewards count compared to immediate ones (0 to 1)."},
      {"learningRate", "Step size for learning updates. Too large diverges, too small learns slowly."},
      {"epsilonStart", "Probability of a random action at the start of training."},
      {"epsilonEnd", "Probability of a random action once annealing is complete."},
      {"epsilonDecaySteps", "Number of environment steps over which epsilon falls linearly from start to end."},
      {"batchSize", "Transitions (or sequences) per gradient update; PPO minibatch size."},
      {"bufferCapacity", "Maximum number of transitions kept in experience replay."},
      {"targetSyncInterval", "Gradient updates between copies of the online network into the target network."},
      {"updateEvery", "Environment steps between gradient updates."},
      {"hiddenLayers", "Widths of the hidden layers of the feed-forward networks, e.g. 64,64."},
      {"recurrentHidden", "Size of the recurrent (GRU) state for DRQN/ADRQN."},
      {"seqLen", "Length of the replayed sequences used to train recurrent agents."},
      {"clipEpsilon", "PPO clipping range for the probability ratio."},
      {"ppoEpochs", "Passes PPO makes over each collected rollout."},
      {"rolloutSteps", "Environment steps PPO collects (in whole episodes) before each update."},
      {"episodes", "Number of episodes to run."},
      {"maxStepsPerEpisode", "Step limit per episode, in addition to the environment's own limit."},
      {"seed", "Master random seed; the same seed reproduces the same run."},
  };
  return text;
}

void Hyperparameters::validate() const {
  requireUnit("gamma", gamma);
  if (!(learningRate > 0.0) || !std::isfinite(learningRate)) invalid("learningRate must be > 0");
  requireUnit("epsilonStart", epsilonStart);
  requireUnit("epsilonEnd", epsilonEnd);
  if (epsilonEnd > epsilonStart) invalid("epsilonEnd must be <= epsilonStart");
  requireCount("epsilonDecaySteps", epsilonDecaySteps);
  requireCount("batchSize", batchSize);
  requireCount("bufferCapacity", bufferCapacity);
  requireCount("targetSyncInterval", targetSyncInterval);
  requireCount("updateEvery", updateEvery);
  for (std::size_t w : hiddenLayers) requireCount("hiddenLayers width", w);
  requireCount("recurrentHidden", recurrentHidden);
  requireCount("seqLen", seqLen);
  if (!(clipEpsilon > 0.0 && clipEpsilon < 1.0)) invalid("clipEpsilon must be in (0,1)");
  requireCount("ppoEpochs", ppoEpochs);
  requireCount("rolloutSteps", rolloutSteps);
  requireCount("episodes", episodes);
  requireCount("maxStepsPerEpisode", maxStepsPerEpisode);
}

void Hyperparameters::set(std::string_view key, std::string_view value) {
  const auto it = fields().find(std::string(key));
  if (it == fields().end()) unknownKey(key);
  try {
    it->second.parse(*this, value);
  } catch (const Error& e) {
    invalid(std::string(key) + ": " + e.what());
  }
}

void to_json(Json& j, const Hyperparameters& hp) {
  j = Json{{"gamma", hp.gamma},
           {"learningRate", hp.learningRate},
           {"epsilonStart", hp.epsilonStart},
           {"epsilonEnd", hp.epsilonEnd},
           {"epsilonDecaySteps", hp.epsilonDecaySteps},
           {"batchSize", hp.batchSize},
           {"bufferCapacity", hp.bufferCapacity},
           {"targetSyncInterval", hp.targetSyncInterval},
           {"updateEvery", hp.updateEvery},
           {"hiddenLayers", hp.hiddenLayers},
           {"recurrentHidden", hp.recurrentHidden},
           {"seqLen", hp.seqLen},
           {"clipEpsilon", hp.clipEpsilon},
           {"ppoEpochs", hp.ppoEpochs},
           {"rolloutSteps", hp.rolloutSteps},
           {"episodes", hp.episodes},
           {"maxStepsPerEpisode", hp.maxStepsPerEpisode},
           {"seed", hp.seed}};
}

void applyJson(Hyperparameters& hp, const Json& j) {
  if (j.is_null()) return;
  if (!j.is_object()) invalid("hyperparameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = fields().find(key);
    if (it == fields().end()) unknownKey(key);
    try {
      it->second.fromJson(hp, value);
    } catch (const Error& e) {
      invalid(key + ": " + e.what());
    }
  }
}

}  // namespace easyrl::agents
