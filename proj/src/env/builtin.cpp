#include "easyrl/env/builtin.hpp"

#include "easyrl/env/cart_pole.hpp"
#include "easyrl/env/drug_dosage.hpp"
#include "easyrl/env/emarket.hpp"
#include "easyrl/env/frozen_lake.hpp"
#include "easyrl/env/mountain_car.hpp"

namespace easyrl::env {
namespace {

template <typename Env, typename... Args>
EnvFactory factoryFor(Args... args) {
  Env probe(args...);
  return EnvFactory{probe.descriptor(), [args...] {
                      return std::unique_ptr<Environment>(std::make_unique<Env>(args...));
                    }};
}

}  // namespace

const std::vector<EnvFactory>& builtinEnvironments() {
  static const std::vector<EnvFactory> factories = {
      factoryFor<FrozenLake>(false), factoryFor<FrozenLake>(true),
      factoryFor<CartPole>(),        factoryFor<MountainCar>(),
      factoryFor<DrugDosage>(),      factoryFor<EMarket>(),
  };
  return factories;
}

}  // namespace easyrl::env
