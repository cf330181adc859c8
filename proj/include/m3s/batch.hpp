// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3s/tensor.hpp"

namespace m3s {

enum class LabelKind { regression, classification };

inline constexpr std::size_t kNumModalities = 3;
enum class Modality : std::size_t { audio = 0, video = 1, language = 2 };
const char* modality_name(Modality m);

/// One observation: a feature vector per modality plus a label. Regression
/// labels are sentiment scores; classification labels are class indices
/// stored as exact integers in a double.
struct MultimodalSample {
  std::vector<double> audio;
  std::vector<double> video;
  std::vector<double> language;
  double label = 0.0;
};

/// Samples stacked row-wise into one [B, T_m] tensor per modality.
struct Batch {
  Tensor audio;
  Tensor video;
  Tensor language;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  const Tensor& modality(Modality m) const;
  Tensor& modality(Modality m);
};

Batch make_batch(std::span<const MultimodalSample> samples);
Batch make_batch(std::span<const MultimodalSample> samples,
                 std::span<const std::size_t> indices);

}  // namespace m3s
