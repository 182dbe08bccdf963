#include "easyrl/nn/adam.hpp"

#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::nn {

AdamState AdamState::like(const Tensor& params) {
  AdamState state;
  state.firstMoment = Tensor(params.shape());
  state.secondMoment = Tensor(params.shape());
  return state;
}

void adamStep(Tensor& params, const Tensor& grads, AdamState& state,
              double learningRate) {
  if (!params.sameShape(grads)) {
    fail(ErrorCode::Shape, "adam: parameter shape " + shapeString(params.shape()) +
                               " vs gradient shape " + shapeString(grads.shape()));
  }
  if (!state.firstMoment.sameShape(params)) state = AdamState::like(params);
  if (!(learningRate > 0.0)) fail(ErrorCode::Argument, "adam: learning rate must be positive");
  if (!grads.allFinite()) fail(ErrorCode::Numeric, "adam: non-finite gradient");

  state.stepCount += 1;
  const double t = static_cast<double>(state.stepCount);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto p = params.data();
  auto g = grads.data();
  auto m = state.firstMoment.data();
  auto v = state.secondMoment.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double mHat = m[i] / correction1;
    const double vHat = v[i] / correction2;
    p[i] -= learningRate * mHat / (std::sqrt(vHat) + state.numericalFloor);
  }
}

Adam::Adam(std::span<Tensor* const> params) {
  states_.reserve(params.size());
  for (const Tensor* p : params) states_.push_back(AdamState::like(*p));
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads,
                double learningRate) {
  requireDim(grads.size(), params.size(), "adam gradient list");
  if (states_.size() != params.size()) {
    states_.clear();
    for (const Tensor* p : params) states_.push_back(AdamState::like(*p));
  }
  // Validate everything first so a bad gradient leaves all parameters intact.
  for (const auto& g : grads) {
    if (!g.allFinite()) fail(ErrorCode::Numeric, "adam: non-finite gradient");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    adamStep(*params[i], grads[i], states_[i], learningRate);
  }
}

}  // namespace easyrl::nn
