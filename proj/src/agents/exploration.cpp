#include "easyrl/agents/exploration.hpp"

#include <algorithm>

#include "easyrl/common/error.hpp"

namespace easyrl::agents {

double annealEpsilon(const Hyperparameters& hp, std::uint64_t globalStep) {
  const double progress = std::min(
      1.0, static_cast<double>(globalStep) / static_cast<double>(hp.epsilonDecaySteps));
  return hp.epsilonStart + (hp.epsilonEnd - hp.epsilonStart) * progress;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::Argument, "argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t epsilonGreedy(std::span<const double> qValues, double epsilon, Rng& rng) {
  if (qValues.empty()) fail(ErrorCode::Argument, "epsilonGreedy needs at least one action");
  if (epsilon > 0.0 && rng.uniform() < epsilon) return rng.uniformInt(qValues.size());
  return argmax(qValues);
}

std::size_t sampleCategorical(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // rounding left u above the total; take the last action with mass
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

}  // namespace easyrl::agents
