#pragma once

#include <array>
#include <optional>

#include "easyrl/common/rng.hpp"
#include "easyrl/env/environment.hpp"

namespace easyrl::env {

// Seller selection with hidden seller qualities. The observation carries the
// last outcome and elapsed time only, never which seller was chosen, so a
// good policy has to remember its own choices.
class EMarket : public Environment {
 public:
  static constexpr std::size_t kSellers = 4;
  static constexpr std::size_t kEpisodeLength = 50;
  static constexpr std::array<double, kSellers> kQualities = {0.9, 0.6, 0.4, 0.1};

  EMarket();

  const EnvDescriptor& descriptor() const override { return descriptor_; }
  const std::array<double, kSellers>& qualities() const { return qualities_; }

  // Test hook: every reset uses these qualities instead of a shuffle.
  void forceQualities(std::optional<std::array<double, kSellers>> qualities) {
    forced_ = qualities;
  }

 protected:
  StepResult doReset(std::optional<std::uint64_t> seed) override;
  StepResult doStep(std::size_t action) override;
  Frame doRender() override;

 private:
  EnvDescriptor descriptor_;
  Rng rng_;
  std::array<double, kSellers> qualities_ = kQualities;
  std::optional<std::array<double, kSellers>> forced_;
  std::size_t t_ = 0;
  std::optional<std::size_t> lastSeller_;
  bool lastOutcome_ = false;
};

}  // namespace easyrl::env
