#include "easyrl/env/emarket.hpp"

#include <utility>

namespace easyrl::env {

EMarket::EMarket() {
  descriptor_ = EnvDescriptor{"EMarket-v0", ObsKind::continuous(2), kSellers,
                              kEpisodeLength, true, "emarket"};
}

StepResult EMarket::doReset(std::optional<std::uint64_t> seed) {
  if (seed) rng_.reseed(*seed);
  if (forced_) {
    qualities_ = *forced_;
  } else {
    qualities_ = kQualities;
    for (std::size_t i = kSellers - 1; i > 0; --i) {
      std::swap(qualities_[i], qualities_[rng_.uniformInt(i + 1)]);
    }
  }
  t_ = 0;
  lastSeller_.reset();
  lastOutcome_ = false;
  return {Observation::continuous({0.0, 0.0}), 0.0, false};
}

StepResult EMarket::doStep(std::size_t action) {
  const bool good = rng_.bernoulli(qualities_[action]);
  ++t_;
  lastSeller_ = action;
  lastOutcome_ = good;
  return {Observation::continuous({good ? 1.0 : 0.0,
                                   static_cast<double>(t_) / kEpisodeLength}),
          good ? 1.0 : -1.0, t_ >= kEpisodeLength};
}

Frame EMarket::doRender() {
  Json frame{{"outcome", lastOutcome_}};
  frame["seller"] = lastSeller_ ? Json(*lastSeller_) : Json(nullptr);
  return frame;
}

}  // namespace easyrl::env
