// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "m3s/error.hpp"
#include "m3s/fsio.hpp"

namespace m3s {

namespace {

std::string trim(const std::string& text) {
  std::size_t a = text.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = text.find_last_not_of(" \t\r");
  return text.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& body,
                                    std::size_t line_no) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream in(body);
  while (std::getline(in, current, ',')) {
    std::string item = trim(current);
    if (item.empty()) {
      raise(ErrorCode::parse_error,
            "config line " + std::to_string(line_no) + ": empty list element");
    }
    items.push_back(item);
  }
  return items;
}

double to_double(const std::string& text, const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(value)) {
    raise(ErrorCode::config_invalid,
          "config key '" + key + "': '" + text + "' is not a finite number");
  }
  return value;
}

std::int64_t to_int(const std::string& text, const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  long long value = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0') {
    raise(ErrorCode::config_invalid,
          "config key '" + key + "': '" + text + "' is not an integer");
  }
  return static_cast<std::int64_t>(value);
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::parse_error,
            "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      raise(ErrorCode::parse_error,
            "config line " + std::to_string(line_no) + ": empty key");
    }
    Entry entry;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') {
        raise(ErrorCode::parse_error,
              "config line " + std::to_string(line_no) + ": unterminated list");
      }
      entry.is_list = true;
      std::string body = trim(value.substr(1, value.size() - 2));
      if (!body.empty()) entry.values = split_list(body, line_no);
    } else {
      if (value.empty()) {
        raise(ErrorCode::parse_error,
              "config line " + std::to_string(line_no) + ": empty value for '" +
                  key + "'");
      }
      entry.values.push_back(value);
    }
    map.entries_[key] = std::move(entry);
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  return parse(read_file(path));
}

bool ConfigMap::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const ConfigMap::Entry& ConfigMap::lookup(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    raise(ErrorCode::config_invalid, "missing config key '" + key + "'");
  }
  consumed_.insert(key);
  return it->second;
}

std::string ConfigMap::get_string(const std::string& key) const {
  const Entry& entry = lookup(key);
  if (entry.is_list || entry.values.size() != 1) {
    raise(ErrorCode::config_invalid,
          "config key '" + key + "' must be a single value");
  }
  return entry.values[0];
}

std::string ConfigMap::get_string_or(const std::string& key,
                                     const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double ConfigMap::get_double(const std::string& key) const {
  return to_double(get_string(key), key);
}

double ConfigMap::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t ConfigMap::get_int(const std::string& key) const {
  return to_int(get_string(key), key);
}

std::int64_t ConfigMap::get_int_or(const std::string& key,
                                   std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
  const Entry& entry = lookup(key);
  if (!entry.is_list) {
    raise(ErrorCode::config_invalid, "config key '" + key + "' must be a list");
  }
  std::vector<double> out;
  out.reserve(entry.values.size());
  for (const std::string& v : entry.values) out.push_back(to_double(v, key));
  return out;
}

std::vector<std::int64_t> ConfigMap::get_int_list(const std::string& key) const {
  const Entry& entry = lookup(key);
  if (!entry.is_list) {
    raise(ErrorCode::config_invalid, "config key '" + key + "' must be a list");
  }
  std::vector<std::int64_t> out;
  out.reserve(entry.values.size());
  for (const std::string& v : entry.values) out.push_back(to_int(v, key));
  return out;
}

std::vector<std::string> ConfigMap::get_string_list(
    const std::string& key) const {
  const Entry& entry = lookup(key);
  if (!entry.is_list) {
    raise(ErrorCode::config_invalid, "config key '" + key + "' must be a list");
  }
  return entry.values;
}

void ConfigMap::set(const std::string& key, const std::string& raw_value) {
  Entry entry;
  if (!raw_value.empty() && raw_value.front() == '[' && raw_value.back() == ']') {
    entry.is_list = true;
    std::string body = trim(raw_value.substr(1, raw_value.size() - 2));
    if (!body.empty()) entry.values = split_list(body, 0);
  } else {
    entry.values.push_back(raw_value);
  }
  entries_[key] = std::move(entry);
}

std::vector<std::string> ConfigMap::unconsumed_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) {
    if (consumed_.count(key) == 0) out.push_back(key);
  }
  return out;
}

}  // namespace m3s
