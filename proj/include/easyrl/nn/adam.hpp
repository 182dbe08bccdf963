#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "easyrl/nn/tensor.hpp"

namespace easyrl::nn {

struct AdamState {
  Tensor firstMoment;
  Tensor secondMoment;
  std::uint64_t stepCount = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double numericalFloor = 1e-8;

  static AdamState like(const Tensor& params);
};

// Bias-corrected Adam update of params in place. Throws a numeric error on
// a non-finite gradient (params are left untouched in that case).
void adamStep(Tensor& params, const Tensor& grads, AdamState& state,
              double learningRate);

// One AdamState per parameter tensor.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::span<Tensor* const> params);

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads,
            double learningRate);

  const std::vector<AdamState>& states() const { return states_; }

 private:
  std::vector<AdamState> states_;
};

}  // namespace easyrl::nn
