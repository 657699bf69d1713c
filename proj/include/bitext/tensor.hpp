#ifndef BITEXT_TENSOR_HPP
#define BITEXT_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bitext/common.hpp"

namespace bitext {

// Dense row-major float32 array. Parameters, gradients and activations are
// stored in 32 bits; reductions over them accumulate in 64 bits.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape, float fill = 0.0f)
      : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor from(std::vector<int64_t> shape, std::vector<float> values) {
    Tensor t;
    t.shape_ = std::move(shape);
    if (values.size() != checked_size(t.shape_)) {
      throw Error("Tensor::from: value count does not match shape");
    }
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // Row-major 2-D access.
  float& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  float at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (float v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // Squared L2 norm with a 64-bit accumulator.
  double squared_norm() const {
    double acc = 0.0;
    for (float v : data_) acc += static_cast<double>(v) * static_cast<double>(v);
    return acc;
  }

  void scale(float s) {
    for (float& v : data_) v *= s;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static size_t checked_size(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw Error("Tensor: negative dimension");
      n *= d;
    }
    return static_cast<size_t>(n);
  }

  std::vector<int64_t> shape_;
  std::vector<float> data_;
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace bitext

#endif  // BITEXT_TENSOR_HPP
