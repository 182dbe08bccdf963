#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace easyrl::nn {

// Dense row-major tensor of doubles. Rank 1 holds vectors, rank 2 holds
// matrices and batches (rows = samples).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const noexcept {
    return shape_.size() < 2 ? 1 : shape_[1];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols(), cols());
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  void fill(double value);
  bool allFinite() const noexcept;
  bool sameShape(const Tensor& other) const noexcept {
    return shape_ == other.shape_;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shapeString(const std::vector<std::size_t>& shape);

// Throws a shape error unless the two extents agree.
void requireDim(std::size_t actual, std::size_t expected, const char* what);

double dot(std::span<const double> a, std::span<const double> b);

// Sum of squares over a list of gradient tensors; used for norm clipping.
double squaredNorm(std::span<const Tensor> tensors);

// Scales the tensors in place so their joint L2 norm is at most maxNorm.
// Returns the norm before clipping.
double clipGlobalNorm(std::span<Tensor> tensors, double maxNorm);

}  // namespace easyrl::nn
