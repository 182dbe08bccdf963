#include "easyrl/nn/dense_net.hpp"

#include <algorithm>
#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::nn {

std::string_view toString(Activation activation) {
  switch (activation) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Softmax: return "softmax";
  }
  return "identity";
}

Activation activationFromString(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "softmax") return Activation::Softmax;
  fail(ErrorCode::Format, "unknown activation '" + std::string(name) + "'");
}

bool operator==(const DenseLayer& a, const DenseLayer& b) {
  return a.activation == b.activation && a.weight == b.weight &&
         a.bias == b.bias;
}

void softmaxInPlace(std::span<double> values) {
  const double peak = *std::max_element(values.begin(), values.end());
  double total = 0.0;
  for (double& v : values) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : values) v /= total;
}

std::vector<Tensor> DenseGrads::flatten() const {
  std::vector<Tensor> out;
  out.reserve(weight.size() * 2);
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.push_back(weight[i]);
    out.push_back(bias[i]);
  }
  return out;
}

void DenseGrads::setZero() {
  for (auto& t : weight) t.fill(0.0);
  for (auto& t : bias) t.fill(0.0);
}

void DenseGrads::add(const DenseGrads& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    auto w = weight[i].data();
    auto ow = other.weight[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += ow[k];
    auto b = bias[i].data();
    auto ob = other.bias[i].data();
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += ob[k];
  }
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) fail(ErrorCode::Shape, "dense net needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.weight.rank() != 2) {
      fail(ErrorCode::Shape, "layer " + std::to_string(k) + " weight must be a matrix");
    }
    requireDim(layer.bias.size(), layer.outDim(), "layer bias");
    if (k > 0) requireDim(layer.inDim(), layers_[k - 1].outDim(), "layer chain");
    if (layer.activation == Activation::Softmax && k + 1 != layers_.size()) {
      fail(ErrorCode::Shape, "softmax is only permitted on the final layer");
    }
  }
}

DenseNet DenseNet::create(std::size_t inputDim,
                          const std::vector<std::size_t>& hidden,
                          std::size_t outputDim, Activation hiddenActivation,
                          Activation outputActivation, Rng& rng) {
  std::vector<DenseLayer> layers;
  std::size_t in = inputDim;
  auto addLayer = [&](std::size_t out, Activation act) {
    DenseLayer layer{Tensor::matrix(out, in), Tensor({out}), act};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weight.data()) w = rng.uniform(-limit, limit);
    layers.push_back(std::move(layer));
    in = out;
  };
  for (std::size_t width : hidden) addLayer(width, hiddenActivation);
  addLayer(outputDim, outputActivation);
  return DenseNet(std::move(layers));
}

Tensor DenseNet::forward(const Tensor& input) const {
  requireDim(input.size(), inputDim(), "dense net input");
  DenseCache cache;
  Tensor batch({1, input.size()}, std::vector<double>(input.data().begin(),
                                                      input.data().end()));
  const Tensor& out = forwardBatch(batch, cache);
  return Tensor::vector(out.values());
}

const Tensor& DenseNet::forwardBatch(const Tensor& input,
                                     DenseCache& cache) const {
  requireDim(input.cols(), inputDim(), "dense net input");
  const std::size_t batch = input.rows();
  cache.activations.resize(layers_.size() + 1);
  cache.activations[0] = input;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    const Tensor& x = cache.activations[k];
    Tensor& y = cache.activations[k + 1];
    const std::size_t out = layer.outDim();
    if (y.rows() != batch || y.cols() != out || y.rank() != 2) {
      y = Tensor::matrix(batch, out);
    }
    for (std::size_t b = 0; b < batch; ++b) {
      auto xr = x.row(b);
      auto yr = y.row(b);
      for (std::size_t o = 0; o < out; ++o) {
        yr[o] = layer.bias[o] + dot(layer.weight.row(o), xr);
      }
      switch (layer.activation) {
        case Activation::Identity: break;
        case Activation::Relu:
          for (double& v : yr) v = v > 0.0 ? v : 0.0;
          break;
        case Activation::Tanh:
          for (double& v : yr) v = std::tanh(v);
          break;
        case Activation::Softmax: softmaxInPlace(yr); break;
      }
    }
  }
  const Tensor& output = cache.activations.back();
  if (!output.allFinite()) fail(ErrorCode::Numeric, "dense net produced a non-finite output");
  return output;
}

DenseBackward DenseNet::backward(const Tensor& input,
                                 const Tensor& upstreamGrad) const {
  requireDim(input.size(), inputDim(), "dense net input");
  requireDim(upstreamGrad.size(), outputDim(), "upstream gradient");
  DenseCache cache;
  forwardBatch(Tensor({1, input.size()}, input.values()), cache);
  auto result = backwardBatch(cache, Tensor({1, upstreamGrad.size()},
                                            upstreamGrad.values()));
  result.inputGrad = Tensor::vector(result.inputGrad.values());
  return result;
}

DenseBackward DenseNet::backwardBatch(const DenseCache& cache,
                                      const Tensor& upstream) const {
  requireDim(upstream.cols(), outputDim(), "upstream gradient");
  requireDim(upstream.rows(), cache.output().rows(), "upstream batch");
  const std::size_t batch = upstream.rows();
  DenseBackward result{zeroGrads(), {}};
  Tensor grad = upstream;  // gradient w.r.t. the current layer's output
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    const Tensor& x = cache.activations[k];
    const Tensor& y = cache.activations[k + 1];
    const std::size_t in = layer.inDim();
    const std::size_t out = layer.outDim();
    // grad becomes dL/dz (pre-activation)
    for (std::size_t b = 0; b < batch; ++b) {
      auto g = grad.row(b);
      auto yr = y.row(b);
      switch (layer.activation) {
        case Activation::Identity: break;
        case Activation::Relu:
          for (std::size_t o = 0; o < out; ++o) {
            if (yr[o] <= 0.0) g[o] = 0.0;
          }
          break;
        case Activation::Tanh:
          for (std::size_t o = 0; o < out; ++o) g[o] *= 1.0 - yr[o] * yr[o];
          break;
        case Activation::Softmax: {
          const double inner = dot(g, yr);
          for (std::size_t o = 0; o < out; ++o) g[o] = yr[o] * (g[o] - inner);
          break;
        }
      }
    }
    Tensor& dW = result.params.weight[k];
    Tensor& db = result.params.bias[k];
    Tensor dx = Tensor::matrix(batch, in);
    for (std::size_t b = 0; b < batch; ++b) {
      auto g = grad.row(b);
      auto xr = x.row(b);
      auto dxr = dx.row(b);
      for (std::size_t o = 0; o < out; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        db[o] += go;
        auto dWr = dW.row(o);
        auto Wr = layer.weight.row(o);
        for (std::size_t i = 0; i < in; ++i) {
          dWr[i] += go * xr[i];
          dxr[i] += go * Wr[i];
        }
      }
    }
    grad = std::move(dx);
  }
  result.inputGrad = std::move(grad);
  return result;
}

std::vector<Tensor*> DenseNet::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> DenseNet::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

DenseGrads DenseNet::zeroGrads() const {
  DenseGrads grads;
  for (const auto& layer : layers_) {
    grads.weight.emplace_back(layer.weight.shape());
    grads.bias.emplace_back(layer.bias.shape());
  }
  return grads;
}

}  // namespace easyrl::nn
