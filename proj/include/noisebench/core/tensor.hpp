#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisebench {

// Dense row-major float tensor, rank <= 4. NCHW for feature maps, {N, D} for
// matrices, {D} for vectors.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), 0.0f);
  }
  Tensor(std::vector<std::size_t> shape, float fill) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), fill);
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // {N,C,H,W} accessor
  float& at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  float at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  float& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  float at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0f); }

  void reshape(std::vector<std::size_t> shape) {
    if (numel_of(shape) != data_.size()) throw std::invalid_argument("Tensor::reshape: numel mismatch");
    shape_ = std::move(shape);
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + "]";
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

inline void axpy(float a, const Tensor& x, Tensor& y) {
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] += a * x[i];
}

}  // namespace noisebench
