#include "easyrl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "easyrl/common/error.hpp"

namespace easyrl::nn {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) {
    fail(ErrorCode::Shape, "tensor shape " + shapeString(shape_) +
                               " does not match " +
                               std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return vector(std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::allFinite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string shapeString(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void requireDim(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    fail(ErrorCode::Shape, std::string(what) + ": got dimension " +
                               std::to_string(actual) + ", expected " +
                               std::to_string(expected));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double squaredNorm(std::span<const Tensor> tensors) {
  double sum = 0.0;
  for (const auto& t : tensors) {
    for (double v : t.data()) sum += v * v;
  }
  return sum;
}

double clipGlobalNorm(std::span<Tensor> tensors, double maxNorm) {
  const double norm = std::sqrt(squaredNorm(tensors));
  if (norm > maxNorm && norm > 0.0) {
    const double scale = maxNorm / norm;
    for (auto& t : tensors) {
      for (double& v : t.data()) v *= scale;
    }
  }
  return norm;
}

}  // namespace easyrl::nn
