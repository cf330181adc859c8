// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/batch.hpp"

namespace m3s {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::audio: return "audio";
    case Modality::video: return "video";
    case Modality::language: return "language";
  }
  return "?";
}

const Tensor& Batch::modality(Modality m) const {
  switch (m) {
    case Modality::audio: return audio;
    case Modality::video: return video;
    case Modality::language: return language;
  }
  return audio;
}

Tensor& Batch::modality(Modality m) {
  switch (m) {
    case Modality::audio: return audio;
    case Modality::video: return video;
    case Modality::language: return language;
  }
  return audio;
}

namespace {

Tensor stack(std::span<const MultimodalSample> samples,
             std::span<const std::size_t> indices,
             std::vector<double> MultimodalSample::* field) {
  if (indices.empty()) {
    raise(ErrorCode::empty_input, "cannot build a batch of zero samples");
  }
  std::size_t width = (samples[indices[0]].*field).size();
  std::vector<double> data;
  data.reserve(indices.size() * width);
  for (std::size_t idx : indices) {
    const std::vector<double>& row = samples[idx].*field;
    if (row.size() != width) {
      raise(ErrorCode::dim_mismatch,
            "sample feature widths disagree within a batch");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({indices.size(), width}, std::move(data));
}

}  // namespace

Batch make_batch(std::span<const MultimodalSample> samples,
                 std::span<const std::size_t> indices) {
  Batch batch;
  batch.audio = stack(samples, indices, &MultimodalSample::audio);
  batch.video = stack(samples, indices, &MultimodalSample::video);
  batch.language = stack(samples, indices, &MultimodalSample::language);
  batch.labels.reserve(indices.size());
  for (std::size_t idx : indices) batch.labels.push_back(samples[idx].label);
  return batch;
}

Batch make_batch(std::span<const MultimodalSample> samples) {
  std::vector<std::size_t> indices(samples.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  return make_batch(samples, indices);
}

}  // namespace m3s
