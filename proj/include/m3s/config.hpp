// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace m3s {

/// Flat `key = value` configuration text with dotted section paths.
///
/// Grammar (one entry per line):
///   line    := blank | comment | entry
///   comment := '#' anything
///   entry   := key '=' value
///   key     := dotted path, e.g. miss.audio
///   value   := scalar | '[' scalar (',' scalar)* ']'
///
/// Scalars are read as strings and converted on access. Unknown keys are
/// rejected by the experiment-config layer so typos cannot silently
/// misconfigure a run.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text);
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Overrides or inserts a raw value (used for CLI flag overrides).
  void set(const std::string& key, const std::string& raw_value);

  /// Keys never read through a getter; the experiment layer turns these
  /// into ConfigInvalid.
  std::vector<std::string> unconsumed_keys() const;

 private:
  struct Entry {
    std::vector<std::string> values;  // one element for scalars
    bool is_list = false;
  };

  const Entry& lookup(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> consumed_;
};

}  // namespace m3s
