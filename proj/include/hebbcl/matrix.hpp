#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hebbcl/errors.hpp"

namespace hebbcl {

/// Dense row-major matrix whose row count may grow. Column count is fixed.
template <typename T>
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  /// Appends a row and returns its index.
  std::size_t append_row(std::span<const T> values) {
    if (values.size() != cols_) {
      throw InvalidArgument("append_row: expected " + std::to_string(cols_) + " values, got " +
                            std::to_string(values.size()));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    return rows_++;
  }

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Kernels below use a fixed set of independent partial sums so that the
// compiler can vectorize without -ffast-math while keeping a fixed
// summation order (results are reproducible across runs).

inline float dot(std::span<const float> a, std::span<const float> b) noexcept {
  constexpr std::size_t kLanes = 16;
  float acc[kLanes] = {};
  const std::size_t n = a.size();
  const std::size_t body = n - n % kLanes;
  const float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < body; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += pa[i + l] * pb[i + l];
  }
  float tail = 0.0f;
  for (std::size_t i = body; i < n; ++i) tail += pa[i] * pb[i];
  float total = 0.0f;
  for (std::size_t l = 0; l < kLanes; ++l) total += acc[l];
  return total + tail;
}

/// Squared Euclidean distance.
inline float squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  constexpr std::size_t kLanes = 16;
  float acc[kLanes] = {};
  const std::size_t n = a.size();
  const std::size_t body = n - n % kLanes;
  const float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < body; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const float d = pa[i + l] - pb[i + l];
      acc[l] += d * d;
    }
  }
  float tail = 0.0f;
  for (std::size_t i = body; i < n; ++i) {
    const float d = pa[i] - pb[i];
    tail += d * d;
  }
  float total = 0.0f;
  for (std::size_t l = 0; l < kLanes; ++l) total += acc[l];
  return total + tail;
}

inline float l1_norm(std::span<const float> a) noexcept {
  double s = 0.0;
  for (float v : a) s += v < 0.0f ? -v : v;
  return static_cast<float>(s);
}

}  // namespace hebbcl
