// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace m3s {

/// Error categories surfaced by the library. Config errors map to CLI exit
/// code 1, everything else to exit code 2.
enum class ErrorCode {
  shape_mismatch,
  non_finite_input,
  non_scalar_root,
  label_out_of_range,
  length_mismatch,
  parse_error,
  dim_mismatch,
  missing_column,
  config_invalid,
  io_error,
  empty_input,
  constant_input,
  degenerate_sample,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace m3s
