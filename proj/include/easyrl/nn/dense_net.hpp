#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "easyrl/common/rng.hpp"
#include "easyrl/nn/tensor.hpp"

namespace easyrl::nn {

enum class Activation { Identity, Relu, Tanh, Softmax };

std::string_view toString(Activation activation);
Activation activationFromString(std::string_view name);

struct DenseLayer {
  Tensor weight;  // outDim x inDim
  Tensor bias;    // outDim
  Activation activation = Activation::Identity;

  std::size_t inDim() const { return weight.cols(); }
  std::size_t outDim() const { return weight.rows(); }
};

// Per-layer gradients, shaped like the net's parameters.
struct DenseGrads {
  std::vector<Tensor> weight;
  std::vector<Tensor> bias;

  // Flat list in parameter order: w0, b0, w1, b1, ...
  std::vector<Tensor> flatten() const;
  void setZero();
  void add(const DenseGrads& other);
};

// Activations recorded by forwardBatch; index 0 is the input batch.
struct DenseCache {
  std::vector<Tensor> activations;
  const Tensor& output() const { return activations.back(); }
};

struct DenseBackward {
  DenseGrads params;
  Tensor inputGrad;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Glorot-uniform weights, zero biases.
  static DenseNet create(std::size_t inputDim,
                         const std::vector<std::size_t>& hidden,
                         std::size_t outputDim, Activation hiddenActivation,
                         Activation outputActivation, Rng& rng);

  std::size_t inputDim() const { return layers_.front().inDim(); }
  std::size_t outputDim() const { return layers_.back().outDim(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  bool empty() const { return layers_.empty(); }

  Tensor forward(const Tensor& input) const;

  // input is batch x inputDim; fills cache, returns a reference to the output.
  const Tensor& forwardBatch(const Tensor& input, DenseCache& cache) const;

  // Reverse-mode pass for a single input. The forward pass is recomputed.
  DenseBackward backward(const Tensor& input, const Tensor& upstreamGrad) const;

  // upstream is batch x outputDim, gradient of the (already batch-reduced)
  // scalar loss with respect to the cached outputs.
  DenseBackward backwardBatch(const DenseCache& cache,
                              const Tensor& upstream) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  DenseGrads zeroGrads() const;

  friend bool operator==(const DenseNet&, const DenseNet&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

bool operator==(const DenseLayer& a, const DenseLayer& b);

// Row-wise max-shifted softmax.
void softmaxInPlace(std::span<double> values);

}  // namespace easyrl::nn
