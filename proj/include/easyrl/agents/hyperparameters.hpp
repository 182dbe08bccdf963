#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace easyrl::agents {

struct Hyperparameters {
  double gamma = 0.99;
  double learningRate = 1e-3;
  double epsilonStart = 1.0;
  double epsilonEnd = 0.05;
  std::size_t epsilonDecaySteps = 10000;
  std::size_t batchSize = 32;
  std::size_t bufferCapacity = 10000;
  std::size_t targetSyncInterval = 500;  // in gradient updates
  std::size_t updateEvery = 1;           // environment steps per update
  std::vector<std::size_t> hiddenLayers{64, 64};
  std::size_t recurrentHidden = 32;
  std::size_t seqLen = 8;
  double clipEpsilon = 0.2;
  std::size_t ppoEpochs = 4;
  std::size_t rolloutSteps = 512;
  std::size_t episodes = 100;
  std::size_t maxStepsPerEpisode = 500;
  std::uint64_t seed = 0;

  // Throws a validation error naming the first violated bound,
  // e.g. "gamma must be in [0,1]".
  void validate() const;

  // Parses one key=value pair (CLI form). Unknown keys are rejected with a
  // message listing every valid key.
  void set(std::string_view key, std::string_view value);

  static const std::vector<std::string>& keys();
  static const std::map<std::string, std::string>& tooltips();

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

void to_json(nlohmann::json& j, const Hyperparameters& hp);

// Overlays the keys present in j onto hp; unknown keys are rejected.
void applyJson(Hyperparameters& hp, const nlohmann::json& j);

}  // namespace easyrl::agents
