#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "easyrl/agents/hyperparameters.hpp"
#include "easyrl/common/rng.hpp"

namespace easyrl::agents {

// Linear schedule from epsilonStart to epsilonEnd over epsilonDecaySteps.
double annealEpsilon(const Hyperparameters& hp, std::uint64_t globalStep);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

std::size_t epsilonGreedy(std::span<const double> qValues, double epsilon, Rng& rng);

// Draws an index from a probability vector.
std::size_t sampleCategorical(std::span<const double> probabilities, Rng& rng);

}  // namespace easyrl::agents
