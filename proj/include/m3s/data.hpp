// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "m3s/masking.hpp"

namespace m3s {

struct DatasetInfo {
  std::array<std::size_t, kNumModalities> dims{20, 20, 30};
  LabelKind label_kind = LabelKind::regression;
  double label_lo = -1.0;  // regression range
  double label_hi = 1.0;
  std::size_t classes = 2;  // classification only
};

/// Train/valid/test samples plus optional frozen per-sample mask plans
/// (parallel to the sample lists; empty when masks were never frozen).
struct Dataset {
  DatasetInfo info;
  std::vector<MultimodalSample> train;
  std::vector<MultimodalSample> valid;
  std::vector<MultimodalSample> test;
  std::vector<MaskPlan> frozen_train;
  std::vector<MaskPlan> frozen_valid;
  std::vector<MaskPlan> frozen_test;

  std::size_t total() const { return train.size() + valid.size() + test.size(); }
  bool has_frozen_masks() const { return !frozen_train.empty(); }
  void validate() const;
};

struct SyntheticConfig {
  std::array<std::size_t, kNumModalities> dims{20, 20, 30};
  std::array<std::size_t, 3> split_sizes{1368, 456, 457};
  LabelKind task = LabelKind::regression;
  std::size_t classes = 4;
  double label_lo = -1.0;
  double label_hi = 1.0;
  double noise = 0.1;       // sigma: per-coordinate observation noise
  double redundancy = 0.8;  // rho: cross-modality redundancy in [0, 1]
  std::uint64_t seed = 7;

  void validate() const;
};

/// Latent-factor generator: one sentiment z per sample drives every
/// modality (x_m = w_m z + (1 - rho) * private + sigma * noise), so a model
/// can recover information wiped from one modality out of the others when
/// rho is high. label = z for regression, quantized z for classification.
Dataset generate_synthetic(const SyntheticConfig& config);

/// Reads the documented CSV schema
/// (a_0..a_{Ta-1}, v_0..v_{Tv-1}, l_0..l_{Tl-1}, label, split).
/// Dims are inferred from the header; `label_*` and `classes` describe how
/// labels are validated.
Dataset load_csv(const std::string& path, LabelKind label_kind,
                 double label_lo, double label_hi, std::size_t classes);

void save_csv(const Dataset& dataset, const std::string& path);

/// Draws one (rate, span) per modality per sample, once, and stores it; the
/// order is train, valid, test, sample by sample. Used by the ORIG regime
/// and by the frozen evaluation protocol.
Dataset freeze_masks(const Dataset& dataset, const MissingSpec& spec,
                     std::uint64_t seed);

/// Deterministic shuffled partition; split sizes are floor(n * ratio) with
/// the remainder assigned to train.
Dataset split_samples(std::vector<MultimodalSample> samples, DatasetInfo info,
                      const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace m3s
