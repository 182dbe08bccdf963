#include "easyrl/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::nn {

double relativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport gradCheck(std::span<Tensor* const> params,
                          std::span<const Tensor> analytic,
                          const std::function<double()>& loss,
                          double tolerance, double perturbation) {
  if (!(tolerance > 0.0)) fail(ErrorCode::Argument, "gradCheck: tolerance must be positive");
  requireDim(analytic.size(), params.size(), "gradCheck gradient list");
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = *params[p];
    requireDim(analytic[p].size(), param.size(), "gradCheck gradient");
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double saved = param[i];
      param[i] = saved + perturbation;
      const double up = loss();
      param[i] = saved - perturbation;
      const double down = loss();
      param[i] = saved;
      const double numeric = (up - down) / (2.0 * perturbation);
      report.maxRelError =
          std::max(report.maxRelError, relativeError(analytic[p][i], numeric));
      ++report.checked;
    }
  }
  report.pass = report.maxRelError <= tolerance;
  return report;
}

GradCheckReport gradCheckSquaredError(DenseNet& net, const Tensor& input,
                                      const Tensor& target, double tolerance) {
  requireDim(target.size(), net.outputDim(), "gradCheck target");
  auto loss = [&] {
    const Tensor out = net.forward(input);
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - target[i];
      sum += 0.5 * d * d;
    }
    return sum;
  };
  const Tensor out = net.forward(input);
  Tensor upstream(out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) upstream[i] = out[i] - target[i];
  const auto grads = net.backward(input, upstream).params.flatten();
  const auto params = net.parameters();
  return gradCheck(params, grads, loss, tolerance);
}

}  // namespace easyrl::nn
