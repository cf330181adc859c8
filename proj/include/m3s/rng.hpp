// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace m3s {

/// splitmix64 mixing step, used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);

/// Seeded deterministic generator. The raw stream comes from std::mt19937_64
/// (a fixed algorithm, identical on every platform); all value mappings are
/// implemented here rather than via std:: distributions, whose output is
/// implementation-defined. Identical seed => identical draw sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi). Returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer in {0, ..., bound-1} via rejection sampling.
  /// A bound of 1 is a forced choice and consumes no generator state.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal via Box-Muller; one draw pair yields two values.
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    if (values.size() < 2) return;
    for (std::size_t i = values.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
      std::swap(values[i], values[j]);
    }
  }

  /// Independent child seed for a named stream; `salt` separates streams.
  std::uint64_t derive_seed(std::uint64_t salt) const {
    return mix_seed(seed_ ^ mix_seed(salt));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace m3s
