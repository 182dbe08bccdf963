#pragma once

#include <functional>
#include <span>
#include <vector>

#include "easyrl/nn/dense_net.hpp"
#include "easyrl/nn/tensor.hpp"

namespace easyrl::nn {

struct GradCheckReport {
  double maxRelError = 0.0;
  std::size_t checked = 0;
  bool pass = false;
};

// |a - b| / max(1e-8, |a| + |b|)
double relativeError(double analytic, double numeric);

// Compares analytic gradients against central finite differences of loss()
// over every element of every parameter tensor. loss() must read the
// parameters through the same pointers.
GradCheckReport gradCheck(std::span<Tensor* const> params,
                          std::span<const Tensor> analytic,
                          const std::function<double()>& loss,
                          double tolerance, double perturbation = 1e-5);

// Squared-error loss 0.5 * ||net(input) - target||^2 on a dense net.
GradCheckReport gradCheckSquaredError(DenseNet& net, const Tensor& input,
                                      const Tensor& target, double tolerance);

}  // namespace easyrl::nn
