// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "m3s/config.hpp"
#include "m3s/train.hpp"

namespace m3s {

enum class DataSource { synthetic, csv };

/// Fully parsed and validated experiment description. See docs/CONFIG.md for
/// the key-by-key reference.
struct ExperimentConfig {
  ModelConfig model;

  DataSource source = DataSource::synthetic;
  SyntheticConfig synth;  // also carries label kind/range/classes for csv
  std::string csv_path;

  TrainMethod method = TrainMethod::m3s;  // `train` subcommand
  std::vector<TrainMethod> compare_methods;
  bool alpha_given = false;
  MetaConfig meta;  // seed is overwritten per run

  MissingSpec train_missing;
  MissingSpec test_missing;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t eval_seed = 915;
  std::size_t eval_repeats = 3;
  std::string out_dir = "out";

  std::vector<RateRange> sweep_levels;

  static ExperimentConfig from_map(ConfigMap& map);
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_text(const std::string& text);

  /// Raises ConfigInvalid when method-specific requirements are unmet
  /// (alpha must be given whenever m3s is among `methods`).
  void require_method_fields(std::span<const TrainMethod> methods) const;
};

Dataset load_experiment_dataset(const ExperimentConfig& config);

/// Per-method aggregate over the seed list.
struct MethodOutcome {
  TrainMethod method = TrainMethod::orig;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricReport> per_seed;  // final-epoch test metrics
  MetricReport mean;
  MetricReport stddev;                 // sample standard deviation
  std::vector<std::string> curve_files;
};

struct ComparisonReport {
  LabelKind task = LabelKind::regression;
  MissingSpec train_missing;
  MissingSpec test_missing;
  std::uint64_t eval_seed = 0;
  std::uint64_t mask_hash = 0;
  std::size_t epochs = 0;
  std::vector<MethodOutcome> methods;

  const MethodOutcome* find(TrainMethod method) const;
};

/// Trains every configured method over the seed list on identical frozen
/// evaluation views. When `out_dir` is nonempty, per-seed curve CSVs are
/// written under <out_dir>/curves/.
ComparisonReport run_comparison(const ExperimentConfig& config,
                                const std::string& out_dir);

/// Welch p-value of `method` against orig for every metric both aggregates
/// carry; degenerate metric streams (zero variance) are skipped.
std::vector<std::pair<std::string, double>> p_values_vs_orig(
    const ComparisonReport& report, TrainMethod method);

std::string render_comparison_table(const ComparisonReport& report);
std::string comparison_report_json(const ComparisonReport& report);

// Command entry points behind the CLI. Each returns a printable summary and
// writes its artifacts under `out_dir` (empty string = config's run.out).

std::string run_generate(const ExperimentConfig& config,
                         const std::string& out_dir);
std::string run_train(const ExperimentConfig& config, const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override);
std::string run_compare(const ExperimentConfig& config,
                        const std::string& out_dir);
std::string run_adapt(const ExperimentConfig& config, const std::string& out_dir);
std::string run_sweep(const ExperimentConfig& config,
                      std::span<const RateRange> levels,
                      const std::string& out_dir);
std::string run_significance(const std::string& report_path);

}  // namespace m3s
