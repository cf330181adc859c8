// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace m3s {

/// Writes the whole file via a temp-then-rename so readers never observe a
/// partial file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

void ensure_directory(const std::string& path);

/// Shortest decimal form that parses back to the identical double ("%.17g"
/// trimmed down while the round trip stays exact).
std::string format_double(double value);

/// FNV-1a over the raw bytes of a double sequence.
std::uint64_t hash_doubles(const double* values, std::size_t count);

}  // namespace m3s
