// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3s/error.hpp"

namespace m3s {

using Shape = std::vector<std::size_t>;

/// Dense row-major array of 64-bit floats. Plain value type: copies are
/// deep and independent, which keeps parameter snapshots trivially safe.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor constant(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor row_vector(std::vector<double> data);
  /// Identity matrix of extent n.
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Extent of the given axis.
  std::size_t extent(std::size_t axis) const;
  /// Rows/cols of a rank-2 tensor (a rank-1 tensor counts as one row).
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  /// Bitwise equality of shape and payload.
  bool equals(const Tensor& other) const;
  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

}  // namespace m3s
