// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "m3s/fsio.hpp"

namespace m3s {

namespace {

void validate_sample(const MultimodalSample& sample, const DatasetInfo& info,
                     const std::string& where) {
  const std::array<const std::vector<double>*, kNumModalities> feats{
      &sample.audio, &sample.video, &sample.language};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    if (feats[m]->size() != info.dims[m]) {
      raise(ErrorCode::dim_mismatch,
            where + ": " + modality_name(static_cast<Modality>(m)) +
                " width " + std::to_string(feats[m]->size()) +
                " != declared " + std::to_string(info.dims[m]));
    }
    for (double v : *feats[m]) {
      if (!std::isfinite(v)) {
        raise(ErrorCode::non_finite_input, where + ": non-finite feature");
      }
    }
  }
  if (info.label_kind == LabelKind::regression) {
    if (!(sample.label >= info.label_lo && sample.label <= info.label_hi)) {
      raise(ErrorCode::label_out_of_range,
            where + ": regression label " + format_double(sample.label) +
                " outside [" + format_double(info.label_lo) + ", " +
                format_double(info.label_hi) + "]");
    }
  } else {
    double rounded = std::nearbyint(sample.label);
    if (sample.label != rounded || rounded < 0.0 ||
        rounded >= static_cast<double>(info.classes)) {
      raise(ErrorCode::label_out_of_range,
            where + ": class label " + format_double(sample.label) +
                " outside [0, " + std::to_string(info.classes) + ")");
    }
  }
}

}  // namespace

void Dataset::validate() const {
  for (std::size_t d : info.dims) {
    if (d < 1) raise(ErrorCode::config_invalid, "modality dims must be >= 1");
  }
  auto check = [&](const std::vector<MultimodalSample>& samples,
                   const char* split) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      validate_sample(samples[i], info,
                      std::string(split) + " sample " + std::to_string(i));
    }
  };
  check(train, "train");
  check(valid, "valid");
  check(test, "test");
}

void SyntheticConfig::validate() const {
  for (std::size_t d : dims) {
    if (d < 1) raise(ErrorCode::config_invalid, "modality dims must be >= 1");
  }
  for (std::size_t n : split_sizes) {
    if (n < 1) raise(ErrorCode::config_invalid, "every split needs n >= 1");
  }
  if (!(noise >= 0.0)) {
    raise(ErrorCode::config_invalid, "noise sigma must be >= 0");
  }
  if (!(redundancy >= 0.0 && redundancy <= 1.0)) {
    raise(ErrorCode::config_invalid, "redundancy rho must be in [0, 1]");
  }
  if (!(label_lo < label_hi)) {
    raise(ErrorCode::config_invalid, "label range must satisfy lo < hi");
  }
  if (task == LabelKind::classification && classes < 2) {
    raise(ErrorCode::config_invalid, "classification needs at least 2 classes");
  }
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);

  // Fixed per-dataset linear maps from the latent to each modality.
  std::array<std::vector<double>, kNumModalities> projections;
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    projections[m].resize(config.dims[m]);
    for (double& w : projections[m]) w = rng.uniform(-1.0, 1.0);
  }

  Dataset dataset;
  dataset.info.dims = config.dims;
  dataset.info.label_kind = config.task;
  dataset.info.label_lo = config.label_lo;
  dataset.info.label_hi = config.label_hi;
  dataset.info.classes = config.classes;

  double private_scale = 1.0 - config.redundancy;
  auto draw_sample = [&]() {
    MultimodalSample sample;
    double u = rng.uniform01();
    double z;
    if (config.task == LabelKind::regression) {
      z = config.label_lo + (config.label_hi - config.label_lo) * u;
      sample.label = std::clamp(z, config.label_lo, config.label_hi);
    } else {
      double c = std::floor(u * static_cast<double>(config.classes));
      c = std::min(c, static_cast<double>(config.classes - 1));
      sample.label = c;
      z = 2.0 * u - 1.0;  // centered latent behind the class label
    }
    std::array<std::vector<double>*, kNumModalities> feats{
        &sample.audio, &sample.video, &sample.language};
    for (std::size_t m = 0; m < kNumModalities; ++m) {
      feats[m]->resize(config.dims[m]);
      for (std::size_t i = 0; i < config.dims[m]; ++i) {
        double shared = projections[m][i] * z;
        double own = private_scale * rng.normal();
        double noise = config.noise * rng.normal();
        (*feats[m])[i] = shared + own + noise;
      }
    }
    return sample;
  };

  dataset.train.reserve(config.split_sizes[0]);
  dataset.valid.reserve(config.split_sizes[1]);
  dataset.test.reserve(config.split_sizes[2]);
  for (std::size_t i = 0; i < config.split_sizes[0]; ++i) {
    dataset.train.push_back(draw_sample());
  }
  for (std::size_t i = 0; i < config.split_sizes[1]; ++i) {
    dataset.valid.push_back(draw_sample());
  }
  for (std::size_t i = 0; i < config.split_sizes[2]; ++i) {
    dataset.test.push_back(draw_sample());
  }
  return dataset;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // trim surrounding blanks
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    fields.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(value)) {
    raise(ErrorCode::parse_error,
          "line " + std::to_string(line_no) + ": '" + text +
              "' is not a finite number");
  }
  return value;
}

/// Counts a contiguous run of "<prefix>_<i>" columns starting at `pos`,
/// requiring indices 0..k-1 in order.
std::size_t count_prefixed(const std::vector<std::string>& header,
                           std::size_t& pos, const std::string& prefix) {
  std::size_t count = 0;
  while (pos < header.size()) {
    std::string expected = prefix + "_" + std::to_string(count);
    if (header[pos] != expected) break;
    ++count;
    ++pos;
  }
  return count;
}

}  // namespace

Dataset load_csv(const std::string& path, LabelKind label_kind,
                 double label_lo, double label_hi, std::size_t classes) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    raise(ErrorCode::parse_error, path + " is empty");
  }
  std::vector<std::string> header = split_line(line);
  std::size_t pos = 0;
  std::size_t ta = count_prefixed(header, pos, "a");
  std::size_t tv = count_prefixed(header, pos, "v");
  std::size_t tl = count_prefixed(header, pos, "l");
  if (ta == 0 || tv == 0 || tl == 0) {
    raise(ErrorCode::missing_column,
          path + ": header must carry a_*, v_* and l_* feature columns");
  }
  if (pos >= header.size() || header[pos] != "label") {
    raise(ErrorCode::missing_column, path + ": header lacks a label column");
  }
  ++pos;
  if (pos >= header.size() || header[pos] != "split") {
    raise(ErrorCode::missing_column, path + ": header lacks a split column");
  }
  ++pos;
  if (pos != header.size()) {
    raise(ErrorCode::parse_error, path + ": unexpected trailing header columns");
  }

  Dataset dataset;
  dataset.info.dims = {ta, tv, tl};
  dataset.info.label_kind = label_kind;
  dataset.info.label_lo = label_lo;
  dataset.info.label_hi = label_hi;
  dataset.info.classes = classes;

  std::size_t expected_fields = ta + tv + tl + 2;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != expected_fields) {
      raise(ErrorCode::dim_mismatch,
            "line " + std::to_string(line_no) + ": got " +
                std::to_string(fields.size()) + " fields, expected " +
                std::to_string(expected_fields));
    }
    MultimodalSample sample;
    std::size_t f = 0;
    sample.audio.reserve(ta);
    for (std::size_t i = 0; i < ta; ++i) {
      sample.audio.push_back(parse_number(fields[f++], line_no));
    }
    sample.video.reserve(tv);
    for (std::size_t i = 0; i < tv; ++i) {
      sample.video.push_back(parse_number(fields[f++], line_no));
    }
    sample.language.reserve(tl);
    for (std::size_t i = 0; i < tl; ++i) {
      sample.language.push_back(parse_number(fields[f++], line_no));
    }
    sample.label = parse_number(fields[f++], line_no);
    validate_sample(sample, dataset.info, "line " + std::to_string(line_no));
    const std::string& split = fields[f];
    if (split == "train") {
      dataset.train.push_back(std::move(sample));
    } else if (split == "valid") {
      dataset.valid.push_back(std::move(sample));
    } else if (split == "test") {
      dataset.test.push_back(std::move(sample));
    } else {
      raise(ErrorCode::parse_error,
            "line " + std::to_string(line_no) + ": unknown split '" + split +
                "'");
    }
  }
  if (dataset.train.empty() || dataset.valid.empty() || dataset.test.empty()) {
    raise(ErrorCode::empty_input,
          path + ": every split (train/valid/test) needs at least one row");
  }
  return dataset;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ostringstream out;
  auto emit_header = [&](const char* prefix, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      out << prefix << "_" << i << ",";
    }
  };
  emit_header("a", dataset.info.dims[0]);
  emit_header("v", dataset.info.dims[1]);
  emit_header("l", dataset.info.dims[2]);
  out << "label,split\n";

  auto emit_rows = [&](const std::vector<MultimodalSample>& samples,
                       const char* split) {
    for (const MultimodalSample& s : samples) {
      for (double v : s.audio) out << format_double(v) << ",";
      for (double v : s.video) out << format_double(v) << ",";
      for (double v : s.language) out << format_double(v) << ",";
      out << format_double(s.label) << "," << split << "\n";
    }
  };
  emit_rows(dataset.train, "train");
  emit_rows(dataset.valid, "valid");
  emit_rows(dataset.test, "test");
  atomic_write_file(path, out.str());
}

Dataset freeze_masks(const Dataset& dataset, const MissingSpec& spec,
                     std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Dataset out = dataset;
  auto freeze = [&](const std::vector<MultimodalSample>& samples,
                    std::vector<MaskPlan>& plans) {
    plans.clear();
    plans.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      plans.push_back(plan_sample(dataset.info.dims, spec, rng));
    }
  };
  freeze(out.train, out.frozen_train);
  freeze(out.valid, out.frozen_valid);
  freeze(out.test, out.frozen_test);
  return out;
}

Dataset split_samples(std::vector<MultimodalSample> samples, DatasetInfo info,
                      const std::array<double, 3>& ratios, std::uint64_t seed) {
  double total_ratio = 0.0;
  for (double r : ratios) {
    if (r < 0.0) raise(ErrorCode::config_invalid, "split ratios must be >= 0");
    total_ratio += r;
  }
  if (std::fabs(total_ratio - 1.0) > 1e-9) {
    raise(ErrorCode::config_invalid, "split ratios must sum to 1");
  }
  std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::size_t n_valid =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[1]));
  std::size_t n_test =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[2]));
  std::size_t n_train = n - n_valid - n_test;  // floor share plus remainder

  Dataset dataset;
  dataset.info = info;
  for (std::size_t i = 0; i < n; ++i) {
    MultimodalSample& s = samples[order[i]];
    if (i < n_train) {
      dataset.train.push_back(std::move(s));
    } else if (i < n_train + n_valid) {
      dataset.valid.push_back(std::move(s));
    } else {
      dataset.test.push_back(std::move(s));
    }
  }
  dataset.validate();
  return dataset;
}

}  // namespace m3s
