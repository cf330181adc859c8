// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/tensor.hpp"

#include <cmath>
#include <sstream>

namespace m3s {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::non_finite_input: return "NonFiniteInput";
    case ErrorCode::non_scalar_root: return "NonScalarRoot";
    case ErrorCode::label_out_of_range: return "LabelOutOfRange";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::dim_mismatch: return "DimMismatch";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::constant_input: return "ConstantInput";
    case ErrorCode::degenerate_sample: return "DegenerateSample";
  }
  return "UnknownError";
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    raise(ErrorCode::shape_mismatch,
          "tensor payload of " + std::to_string(data_.size()) +
              " values does not fill shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::zeros(Shape shape) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::constant(Shape shape, double value) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row_vector(std::vector<double> data) {
  Shape shape{data.size()};
  return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    raise(ErrorCode::shape_mismatch,
          "axis " + std::to_string(axis) + " out of range for shape " +
              shape_to_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::rows() const {
  if (rank() == 1) return 1;
  if (rank() == 2) return shape_[0];
  raise(ErrorCode::shape_mismatch,
        "rows() needs rank 1 or 2, got shape " + shape_to_string(shape_));
}

std::size_t Tensor::cols() const {
  if (rank() == 1) return shape_[0];
  if (rank() == 2) return shape_[1];
  raise(ErrorCode::shape_mismatch,
        "cols() needs rank 1 or 2, got shape " + shape_to_string(shape_));
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[r * cols() + c];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[r * cols() + c];
}

bool Tensor::equals(const Tensor& other) const {
  return shape_ == other.shape_ && data_ == other.data_;
}

bool Tensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace m3s
