// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>

#include "m3s/data.hpp"
#include "m3s/metrics.hpp"
#include "m3s/model.hpp"

namespace m3s {

enum class OptimizerKind { sgd, adam };

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Meta-training hyperparameters. alpha/K drive the inner meta-train loop,
/// beta the outer update; the two baseline regimes use only beta.
struct MetaConfig {
  double alpha = 2e-4;
  double beta = 1e-4;
  int inner_steps = 1;  // K
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  OptimizerKind outer_optimizer = OptimizerKind::adam;
  AdamSettings adam;
  MaskGranularity granularity = MaskGranularity::per_sample;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class TrainMethod { orig, spl_trn, m3s };
const char* method_name(TrainMethod method);
TrainMethod method_from_name(const std::string& name);

/// Loss value plus gradients aligned with the Parameters enumeration order.
struct GradEval {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

/// A differentiable objective over Parameters. The model objective binds a
/// (config, batch) pair; tests may bind analytic toy losses instead.
using Objective = std::function<GradEval(const Parameters&)>;

Objective make_batch_objective(const ModelConfig& config, Batch batch);

/// Plain elementwise descent step; a zero rate returns the input unchanged
/// (bitwise).
Parameters sgd_step(const Parameters& params, std::span<const Tensor> grads,
                    double lr);

/// First/second moment state for Adam, one slot per parameter tensor.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Parameters& params);

  bool fresh() const { return step_ == 0; }
  long step() const { return step_; }

  friend std::pair<AdamState, Parameters> adam_step(AdamState state,
                                                    const Parameters& params,
                                                    std::span<const Tensor> grads,
                                                    double lr,
                                                    const AdamSettings& settings);

 private:
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long step_ = 0;
};

/// Bias-corrected Adam update; returns the advanced state and new parameters.
std::pair<AdamState, Parameters> adam_step(AdamState state,
                                           const Parameters& params,
                                           std::span<const Tensor> grads,
                                           double lr,
                                           const AdamSettings& settings);

/// Stateful outer optimizer shared across meta-updates of one run.
class OuterOptimizer {
 public:
  OuterOptimizer(OptimizerKind kind, AdamSettings settings)
      : kind_(kind), settings_(settings) {}

  Parameters apply(const Parameters& params, std::span<const Tensor> grads,
                   double lr);

 private:
  OptimizerKind kind_;
  AdamSettings settings_;
  AdamState state_;
};

/// Meta-train: exactly K plain-SGD steps on the same support objective,
/// starting from a copy of `params` (which is never mutated). Returns
/// theta_K.
Parameters inner_adapt(const Parameters& params, const Objective& support,
                       double alpha, int inner_steps);

/// Meta-update: gradient of the query objective taken at `adapted` and
/// applied to `params` through the outer optimizer (first-order update; the
/// inner loop is not differentiated through).
Parameters meta_update(const Parameters& params, const Parameters& adapted,
                       const Objective& query, double beta,
                       OuterOptimizer& optimizer);

/// One full meta-sampling iteration on pre-masked support/query batches.
/// Returns the query loss at the adapted parameters.
double m3s_iteration(Parameters& params, const ModelConfig& config,
                     const Batch& masked_support, const Batch& masked_query,
                     const MetaConfig& meta, OuterOptimizer& optimizer);

/// One plain supervised iteration on a pre-masked batch at the outer rate.
/// Returns the batch loss before the step.
double supervised_iteration(Parameters& params, const ModelConfig& config,
                            const Batch& masked_batch, double lr,
                            OuterOptimizer& optimizer);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double test_loss = 0.0;
  MetricReport valid_metrics;
  MetricReport test_metrics;
  double seconds = 0.0;  // in-memory only; never serialized
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

/// Frozen evaluation protocol: valid/test views masked once from the test
/// MissingSpec at a fixed evaluation seed, so every method and seed within a
/// comparison scores on identical corrupted data. Each sample appears
/// `repeats` times under independently frozen masks, which damps mask luck
/// in the scores without ever resampling between methods.
struct EvalViews {
  Batch valid;
  Batch test;
  LabelKind label_kind = LabelKind::regression;
  std::size_t classes = 2;
  bool with_acc7 = false;
  std::uint64_t mask_hash = 0;  // hash of the masked features
};

EvalViews make_eval_views(const Dataset& dataset, const MissingSpec& test_spec,
                          std::uint64_t eval_seed, std::size_t repeats = 3);

/// Loss plus task metrics of `params` on one pre-masked view.
std::pair<double, MetricReport> evaluate_view(const ModelConfig& config,
                                              const Parameters& params,
                                              const Batch& view,
                                              const EvalViews& protocol);

struct TrainResult {
  Parameters params;
  TrainLog log;
};

/// Meta-sampling training: per iteration two disjoint batches are drawn from
/// the shuffled epoch, both freshly masked, the first adapted on, the second
/// meta-updated on. A trailing unpaired batch is skipped for that epoch.
TrainResult train_m3s(const ModelConfig& config, const Dataset& dataset,
                      const MissingSpec& train_spec, const MetaConfig& meta,
                      const EvalViews& eval_views);

/// Sampling-training baseline: every batch is freshly masked on every visit;
/// single optimizer loop at the outer rate.
TrainResult train_spl_trn(const ModelConfig& config, const Dataset& dataset,
                          const MissingSpec& train_spec, const MetaConfig& meta,
                          const EvalViews& eval_views);

/// Original-regime baseline: trains on the dataset's frozen per-sample masks
/// (freeze_masks must have been applied); masks are never resampled.
TrainResult train_orig(const ModelConfig& config, const Dataset& dataset,
                       const MetaConfig& meta, const EvalViews& eval_views);

/// TrainLog CSV: epoch, train_loss, valid_loss, test_loss, then
/// valid_/test_ metric columns fixed by the task.
void write_trainlog_csv(const TrainLog& log, const EvalViews& protocol,
                        const std::string& path);

}  // namespace m3s
