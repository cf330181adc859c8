// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/masking.hpp"

#include <cmath>

namespace m3s {

MissingSpec MissingSpec::uniform_all(double lo, double hi) {
  MissingSpec spec;
  for (auto& range : spec.ranges) range = RateRange{lo, hi};
  spec.validate();
  return spec;
}

bool MissingSpec::is_zero() const {
  for (const auto& range : ranges) {
    if (range.lo != 0.0 || range.hi != 0.0) return false;
  }
  return true;
}

void MissingSpec::validate() const {
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    const RateRange& range = ranges[m];
    if (!(0.0 <= range.lo && range.lo <= range.hi && range.hi <= 1.0)) {
      raise(ErrorCode::config_invalid,
            std::string("missing-rate range for ") +
                modality_name(static_cast<Modality>(m)) +
                " must satisfy 0 <= lo <= hi <= 1");
    }
  }
}

std::array<double, kNumModalities> sample_rates(const MissingSpec& spec,
                                                Rng& rng) {
  spec.validate();
  std::array<double, kNumModalities> rates{};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    rates[m] = rng.uniform(spec.ranges[m].lo, spec.ranges[m].hi);
  }
  return rates;
}

SpanMask plan_mask(std::size_t dim, double rate, Rng& rng) {
  if (dim < 1) {
    raise(ErrorCode::config_invalid, "plan_mask needs dim >= 1");
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    raise(ErrorCode::config_invalid, "missing rate must be in [0, 1]");
  }
  SpanMask span;
  span.dim = dim;
  span.length = static_cast<std::size_t>(
      std::floor(static_cast<double>(dim) * rate));
  if (span.length == 0) {
    span.start = 0;  // no-op plan; no generator state consumed
    return span;
  }
  span.start = static_cast<std::size_t>(
      rng.uniform_index(static_cast<std::uint64_t>(dim - span.length + 1)));
  return span;
}

std::vector<double> apply_mask(std::span<const double> features,
                               const SpanMask& span) {
  if (features.size() != span.dim) {
    raise(ErrorCode::length_mismatch,
          "mask planned for width " + std::to_string(span.dim) +
              " applied to a vector of width " +
              std::to_string(features.size()));
  }
  std::vector<double> out(features.begin(), features.end());
  apply_mask_row(out.data(), out.size(), span);
  return out;
}

void apply_mask_row(double* row, std::size_t width, const SpanMask& span) {
  if (width != span.dim) {
    raise(ErrorCode::length_mismatch,
          "mask planned for width " + std::to_string(span.dim) +
              " applied to a row of width " + std::to_string(width));
  }
  for (std::size_t i = span.start; i < span.start + span.length; ++i) {
    row[i] = 0.0;
  }
}

MaskPlan plan_sample(const std::array<std::size_t, kNumModalities>& dims,
                     const MissingSpec& spec, Rng& rng) {
  std::array<double, kNumModalities> rates = sample_rates(spec, rng);
  MaskPlan plan;
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    plan.spans[m] = plan_mask(dims[m], rates[m], rng);
  }
  return plan;
}

Batch transform_batch(const Batch& batch, const MissingSpec& spec, Rng& rng,
                      MaskGranularity granularity) {
  std::array<std::size_t, kNumModalities> dims{
      batch.audio.cols(), batch.video.cols(), batch.language.cols()};
  Batch out = batch;
  std::size_t count = batch.size();
  if (granularity == MaskGranularity::per_batch) {
    MaskPlan plan = plan_sample(dims, spec, rng);
    for (std::size_t m = 0; m < kNumModalities; ++m) {
      Tensor& feats = out.modality(static_cast<Modality>(m));
      for (std::size_t row = 0; row < count; ++row) {
        apply_mask_row(feats.data().data() + row * dims[m], dims[m],
                       plan.spans[m]);
      }
    }
    return out;
  }
  for (std::size_t row = 0; row < count; ++row) {
    MaskPlan plan = plan_sample(dims, spec, rng);
    for (std::size_t m = 0; m < kNumModalities; ++m) {
      Tensor& feats = out.modality(static_cast<Modality>(m));
      apply_mask_row(feats.data().data() + row * dims[m], dims[m],
                     plan.spans[m]);
    }
  }
  return out;
}

Batch apply_plans(const Batch& batch, std::span<const MaskPlan> plans) {
  if (plans.size() != batch.size()) {
    raise(ErrorCode::length_mismatch,
          "got " + std::to_string(plans.size()) + " mask plans for " +
              std::to_string(batch.size()) + " samples");
  }
  Batch out = batch;
  for (std::size_t row = 0; row < plans.size(); ++row) {
    for (std::size_t m = 0; m < kNumModalities; ++m) {
      Tensor& feats = out.modality(static_cast<Modality>(m));
      std::size_t width = feats.cols();
      apply_mask_row(feats.data().data() + row * width, width,
                     plans[row].spans[m]);
    }
  }
  return out;
}

}  // namespace m3s
