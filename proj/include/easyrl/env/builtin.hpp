#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "easyrl/env/environment.hpp"

namespace easyrl::env {

struct EnvFactory {
  EnvDescriptor descriptor;
  std::function<std::unique_ptr<Environment>()> create;
};

// FrozenLake-v0, FrozenLakeSlippery-v0, CartPole-v1, MountainCar-v0,
// DrugDosage-v0, EMarket-v0.
const std::vector<EnvFactory>& builtinEnvironments();

}  // namespace easyrl::env
