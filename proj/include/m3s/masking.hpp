// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "m3s/batch.hpp"
#include "m3s/rng.hpp"

namespace m3s {

/// Per-modality missing-rate range. A realized rate r is drawn continuously
/// and uniformly from [lo, hi] per draw.
struct RateRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct MissingSpec {
  std::array<RateRange, kNumModalities> ranges{};

  static MissingSpec uniform_all(double lo, double hi);
  static MissingSpec none() { return uniform_all(0.0, 0.0); }
  bool is_zero() const;
  void validate() const;
  const RateRange& range(Modality m) const {
    return ranges[static_cast<std::size_t>(m)];
  }
};

/// One realized contiguous zero-span: positions [start, start + length - 1]
/// of a width-`dim` vector are wiped. length == 0 is a no-op plan.
struct SpanMask {
  std::size_t dim = 0;
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Realized plan for one sample (or one whole batch): a span per modality.
struct MaskPlan {
  std::array<SpanMask, kNumModalities> spans{};
  const SpanMask& span(Modality m) const {
    return spans[static_cast<std::size_t>(m)];
  }
};

enum class MaskGranularity { per_sample, per_batch };

/// Draws (r_a, r_v, r_l), each independent and uniform within its range.
std::array<double, kNumModalities> sample_rates(const MissingSpec& spec,
                                                Rng& rng);

/// Realizes one span: length = floor(dim * rate); when the length is zero no
/// start is drawn (generator state is untouched); otherwise the start is
/// uniform on the integers {0, ..., dim - length}, so a full-width span is
/// the forced choice start = 0.
SpanMask plan_mask(std::size_t dim, double rate, Rng& rng);

/// Zeroes the planned span; every other position is returned bitwise
/// unchanged. The input is not mutated.
std::vector<double> apply_mask(std::span<const double> features,
                               const SpanMask& span);
/// In-place variant for rows of a stacked batch tensor.
void apply_mask_row(double* row, std::size_t width, const SpanMask& span);

/// Draws a full per-modality plan for feature widths `dims`. Draw order is
/// fixed for reproducibility: the three rates first, then the three span
/// starts in modality order (audio, video, language).
MaskPlan plan_sample(const std::array<std::size_t, kNumModalities>& dims,
                     const MissingSpec& spec, Rng& rng);

/// Masks every sample of a batch. per_sample draws a fresh plan per row;
/// per_batch draws one plan and applies it to all rows. Labels pass through
/// untouched.
Batch transform_batch(const Batch& batch, const MissingSpec& spec, Rng& rng,
                      MaskGranularity granularity = MaskGranularity::per_sample);

/// Applies pre-drawn plans (one per row) to a batch.
Batch apply_plans(const Batch& batch, std::span<const MaskPlan> plans);

}  // namespace m3s
