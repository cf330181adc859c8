// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "m3s/fsio.hpp"

namespace m3s {

namespace {

constexpr std::uint64_t kOrderSalt = 0x6f72646572ULL;   // batch order stream
constexpr std::uint64_t kMaskSalt = 0x6d61736bULL;      // mask stream

std::vector<std::vector<std::size_t>> chunk_indices(
    std::span<const std::size_t> order, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace

void MetaConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    raise(ErrorCode::config_invalid, "learning rates must be >= 0");
  }
  if (inner_steps < 1) {
    raise(ErrorCode::config_invalid, "inner iteration count K must be >= 1");
  }
  if (batch_size < 1) raise(ErrorCode::config_invalid, "batch_size must be >= 1");
  if (epochs < 1) raise(ErrorCode::config_invalid, "epochs must be >= 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
    raise(ErrorCode::config_invalid, "invalid adam settings");
  }
}

const char* method_name(TrainMethod method) {
  switch (method) {
    case TrainMethod::orig: return "orig";
    case TrainMethod::spl_trn: return "spl_trn";
    case TrainMethod::m3s: return "m3s";
  }
  return "?";
}

TrainMethod method_from_name(const std::string& name) {
  if (name == "orig") return TrainMethod::orig;
  if (name == "spl_trn") return TrainMethod::spl_trn;
  if (name == "m3s") return TrainMethod::m3s;
  raise(ErrorCode::config_invalid,
        "unknown training method '" + name + "' (orig | spl_trn | m3s)");
}

Objective make_batch_objective(const ModelConfig& config, Batch batch) {
  return [config, batch = std::move(batch)](const Parameters& params) {
    LossAndGrads eval = loss_and_grads(config, params, batch);
    return GradEval{eval.loss, std::move(eval.grads)};
  };
}

namespace {

void check_grads(const Parameters& params, std::span<const Tensor> grads) {
  if (grads.size() != params.size()) {
    raise(ErrorCode::shape_mismatch,
          "gradient count " + std::to_string(grads.size()) +
              " does not cover " + std::to_string(params.size()) +
              " parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != params.tensor(i).shape()) {
      raise(ErrorCode::shape_mismatch,
            "gradient shape mismatch for parameter " + params.name(i));
    }
  }
}

}  // namespace

Parameters sgd_step(const Parameters& params, std::span<const Tensor> grads,
                    double lr) {
  check_grads(params, grads);
  if (lr == 0.0) return params;  // exact no-op, bit for bit
  Parameters out = params;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Tensor& t = out.tensor(i);
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < t.size(); ++j) t[j] -= lr * g[j];
  }
  return out;
}

AdamState::AdamState(const Parameters& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.push_back(Tensor::zeros(params.tensor(i).shape()));
    v_.push_back(Tensor::zeros(params.tensor(i).shape()));
  }
}

std::pair<AdamState, Parameters> adam_step(AdamState state,
                                           const Parameters& params,
                                           std::span<const Tensor> grads,
                                           double lr,
                                           const AdamSettings& settings) {
  check_grads(params, grads);
  if (state.m_.empty()) state = AdamState(params);
  if (state.m_.size() != params.size()) {
    raise(ErrorCode::shape_mismatch, "adam state does not match parameters");
  }
  state.step_ += 1;
  double correction1 = 1.0 - std::pow(settings.beta1, state.step_);
  double correction2 = 1.0 - std::pow(settings.beta2, state.step_);
  Parameters out = params;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Tensor& t = out.tensor(i);
    Tensor& m = state.m_[i];
    Tensor& v = state.v_[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < t.size(); ++j) {
      m[j] = settings.beta1 * m[j] + (1.0 - settings.beta1) * g[j];
      v[j] = settings.beta2 * v[j] + (1.0 - settings.beta2) * g[j] * g[j];
      double m_hat = m[j] / correction1;
      double v_hat = v[j] / correction2;
      t[j] -= lr * m_hat / (std::sqrt(v_hat) + settings.eps);
    }
  }
  return {std::move(state), std::move(out)};
}

Parameters OuterOptimizer::apply(const Parameters& params,
                                 std::span<const Tensor> grads, double lr) {
  if (kind_ == OptimizerKind::sgd) {
    return sgd_step(params, grads, lr);
  }
  auto [next_state, next_params] = adam_step(std::move(state_), params, grads,
                                             lr, settings_);
  state_ = std::move(next_state);
  return next_params;
}

Parameters inner_adapt(const Parameters& params, const Objective& support,
                       double alpha, int inner_steps) {
  if (inner_steps < 1) {
    raise(ErrorCode::config_invalid, "inner_adapt needs K >= 1");
  }
  Parameters theta = params;
  for (int n = 0; n < inner_steps; ++n) {
    GradEval eval = support(theta);
    theta = sgd_step(theta, eval.grads, alpha);
  }
  return theta;
}

Parameters meta_update(const Parameters& params, const Parameters& adapted,
                       const Objective& query, double beta,
                       OuterOptimizer& optimizer) {
  if (!params.same_layout(adapted)) {
    raise(ErrorCode::shape_mismatch,
          "adapted parameters do not align with the base parameters");
  }
  GradEval eval = query(adapted);
  if (!std::isfinite(eval.loss)) {
    raise(ErrorCode::non_finite_input, "query loss diverged");
  }
  return optimizer.apply(params, eval.grads, beta);
}

double m3s_iteration(Parameters& params, const ModelConfig& config,
                     const Batch& masked_support, const Batch& masked_query,
                     const MetaConfig& meta, OuterOptimizer& optimizer) {
  Objective support = make_batch_objective(config, masked_support);
  Parameters adapted = inner_adapt(params, support, meta.alpha, meta.inner_steps);
  Objective query = make_batch_objective(config, masked_query);
  GradEval eval = query(adapted);
  if (!std::isfinite(eval.loss)) {
    raise(ErrorCode::non_finite_input, "query loss diverged");
  }
  params = optimizer.apply(params, eval.grads, meta.beta);
  return eval.loss;
}

double supervised_iteration(Parameters& params, const ModelConfig& config,
                            const Batch& masked_batch, double lr,
                            OuterOptimizer& optimizer) {
  LossAndGrads eval = loss_and_grads(config, params, masked_batch);
  if (!std::isfinite(eval.loss)) {
    raise(ErrorCode::non_finite_input, "training loss diverged");
  }
  params = optimizer.apply(params, eval.grads, lr);
  return eval.loss;
}

namespace {

Batch concat_batches(const std::vector<Batch>& parts) {
  Batch out = parts.front();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    for (std::size_t m = 0; m < kNumModalities; ++m) {
      const Tensor& add = parts[p].modality(static_cast<Modality>(m));
      Tensor& dst = out.modality(static_cast<Modality>(m));
      std::vector<double> data(dst.data().begin(), dst.data().end());
      data.insert(data.end(), add.data().begin(), add.data().end());
      dst = Tensor({dst.extent(0) + add.extent(0), dst.extent(1)},
                   std::move(data));
    }
    out.labels.insert(out.labels.end(), parts[p].labels.begin(),
                      parts[p].labels.end());
  }
  return out;
}

}  // namespace

EvalViews make_eval_views(const Dataset& dataset, const MissingSpec& test_spec,
                          std::uint64_t eval_seed, std::size_t repeats) {
  if (dataset.valid.empty() || dataset.test.empty()) {
    raise(ErrorCode::empty_input, "evaluation needs valid and test splits");
  }
  if (repeats < 1) {
    raise(ErrorCode::config_invalid, "evaluation needs repeats >= 1");
  }
  std::vector<Batch> valid_parts, test_parts;
  for (std::size_t r = 0; r < repeats; ++r) {
    Dataset frozen =
        freeze_masks(dataset, test_spec, mix_seed(eval_seed) + r);
    valid_parts.push_back(
        apply_plans(make_batch(frozen.valid), frozen.frozen_valid));
    test_parts.push_back(
        apply_plans(make_batch(frozen.test), frozen.frozen_test));
  }
  EvalViews views;
  views.valid = concat_batches(valid_parts);
  views.test = concat_batches(test_parts);
  views.label_kind = dataset.info.label_kind;
  views.classes = dataset.info.classes;
  views.with_acc7 = dataset.info.label_kind == LabelKind::regression &&
                    dataset.info.label_hi - dataset.info.label_lo >= 4.0;
  std::uint64_t h = hash_doubles(views.valid.audio.data().data(),
                                 views.valid.audio.size());
  h ^= hash_doubles(views.valid.video.data().data(), views.valid.video.size());
  h ^= hash_doubles(views.valid.language.data().data(),
                    views.valid.language.size());
  h ^= hash_doubles(views.test.audio.data().data(), views.test.audio.size());
  h ^= hash_doubles(views.test.video.data().data(), views.test.video.size());
  h ^= hash_doubles(views.test.language.data().data(),
                    views.test.language.size());
  views.mask_hash = h;
  return views;
}

std::pair<double, MetricReport> evaluate_view(const ModelConfig& config,
                                              const Parameters& params,
                                              const Batch& view,
                                              const EvalViews& protocol) {
  double loss = loss_value(config, params, view);
  MetricReport report;
  if (protocol.label_kind == LabelKind::regression) {
    std::vector<double> preds = predict_values(config, params, view);
    report = regression_report(preds, view.labels, protocol.with_acc7);
  } else {
    std::vector<int> preds = predict_classes(config, params, view);
    std::vector<int> labels(view.labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = static_cast<int>(view.labels[i]);
    }
    report = classification_report(preds, labels, protocol.classes);
  }
  return {loss, report};
}

namespace {

EpochRecord finish_epoch(const ModelConfig& config, const Parameters& params,
                         const EvalViews& eval_views, std::size_t epoch,
                         double train_loss,
                         std::chrono::steady_clock::time_point started) {
  EpochRecord record;
  record.epoch = epoch;
  record.train_loss = train_loss;
  auto [valid_loss, valid_metrics] =
      evaluate_view(config, params, eval_views.valid, eval_views);
  auto [test_loss, test_metrics] =
      evaluate_view(config, params, eval_views.test, eval_views);
  record.valid_loss = valid_loss;
  record.test_loss = test_loss;
  record.valid_metrics = std::move(valid_metrics);
  record.test_metrics = std::move(test_metrics);
  record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return record;
}

}  // namespace

TrainResult train_m3s(const ModelConfig& config, const Dataset& dataset,
                      const MissingSpec& train_spec, const MetaConfig& meta,
                      const EvalViews& eval_views) {
  config.validate();
  meta.validate();
  train_spec.validate();
  if (dataset.train.empty()) {
    raise(ErrorCode::empty_input, "train split is empty");
  }
  Parameters params = init_params(config, meta.seed);
  Rng order_rng(mix_seed(meta.seed ^ kOrderSalt));
  Rng mask_rng(mix_seed(meta.seed ^ kMaskSalt));
  OuterOptimizer optimizer(meta.outer_optimizer, meta.adam);

  std::vector<std::size_t> order(dataset.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result{std::move(params), {}};
  for (std::size_t epoch = 1; epoch <= meta.epochs; ++epoch) {
    auto started = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    auto batches = chunk_indices(order, meta.batch_size);
    if (batches.size() < 2) {
      raise(ErrorCode::config_invalid,
            "meta-sampling needs at least two batches per epoch; shrink "
            "batch_size or add data");
    }
    double loss_sum = 0.0;
    // The query stream walks the shuffled pass once (one update per batch,
    // the same budget the plain regimes get); the support batch of an
    // iteration is the neighboring chunk, so the two are always disjoint.
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::size_t s = (b + 1) % batches.size();
      Batch support = make_batch(dataset.train, batches[s]);
      Batch query = make_batch(dataset.train, batches[b]);
      Batch masked_support =
          transform_batch(support, train_spec, mask_rng, meta.granularity);
      Batch masked_query =
          transform_batch(query, train_spec, mask_rng, meta.granularity);
      loss_sum += m3s_iteration(result.params, config, masked_support,
                                masked_query, meta, optimizer);
    }
    result.log.epochs.push_back(
        finish_epoch(config, result.params, eval_views, epoch,
                     loss_sum / static_cast<double>(batches.size()), started));
  }
  return result;
}

TrainResult train_spl_trn(const ModelConfig& config, const Dataset& dataset,
                          const MissingSpec& train_spec, const MetaConfig& meta,
                          const EvalViews& eval_views) {
  config.validate();
  meta.validate();
  train_spec.validate();
  if (dataset.train.empty()) {
    raise(ErrorCode::empty_input, "train split is empty");
  }
  Parameters params = init_params(config, meta.seed);
  Rng order_rng(mix_seed(meta.seed ^ kOrderSalt));
  Rng mask_rng(mix_seed(meta.seed ^ kMaskSalt));
  OuterOptimizer optimizer(meta.outer_optimizer, meta.adam);

  std::vector<std::size_t> order(dataset.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result{std::move(params), {}};
  for (std::size_t epoch = 1; epoch <= meta.epochs; ++epoch) {
    auto started = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    auto batches = chunk_indices(order, meta.batch_size);
    double loss_sum = 0.0;
    for (const auto& indices : batches) {
      Batch batch = make_batch(dataset.train, indices);
      Batch masked =
          transform_batch(batch, train_spec, mask_rng, meta.granularity);
      loss_sum += supervised_iteration(result.params, config, masked, meta.beta,
                                       optimizer);
    }
    result.log.epochs.push_back(
        finish_epoch(config, result.params, eval_views, epoch,
                     loss_sum / static_cast<double>(batches.size()), started));
  }
  return result;
}

TrainResult train_orig(const ModelConfig& config, const Dataset& dataset,
                       const MetaConfig& meta, const EvalViews& eval_views) {
  config.validate();
  meta.validate();
  if (dataset.train.empty()) {
    raise(ErrorCode::empty_input, "train split is empty");
  }
  if (dataset.frozen_train.size() != dataset.train.size()) {
    raise(ErrorCode::config_invalid,
          "train_orig needs a dataset with frozen masks (freeze_masks)");
  }
  // The fixed corrupted view of the training data, computed once; masks are
  // never resampled.
  Batch all = make_batch(dataset.train);
  Batch masked_all = apply_plans(all, dataset.frozen_train);

  Parameters params = init_params(config, meta.seed);
  Rng order_rng(mix_seed(meta.seed ^ kOrderSalt));
  OuterOptimizer optimizer(meta.outer_optimizer, meta.adam);

  std::vector<MultimodalSample> masked_samples(dataset.train.size());
  std::array<std::size_t, kNumModalities> dims = dataset.info.dims;
  for (std::size_t i = 0; i < masked_samples.size(); ++i) {
    MultimodalSample& s = masked_samples[i];
    s.label = masked_all.labels[i];
    auto copy_row = [&](const Tensor& feats, std::vector<double>& out,
                        std::size_t width) {
      out.assign(feats.data().begin() + static_cast<std::ptrdiff_t>(i * width),
                 feats.data().begin() +
                     static_cast<std::ptrdiff_t>((i + 1) * width));
    };
    copy_row(masked_all.audio, s.audio, dims[0]);
    copy_row(masked_all.video, s.video, dims[1]);
    copy_row(masked_all.language, s.language, dims[2]);
  }

  std::vector<std::size_t> order(dataset.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result{std::move(params), {}};
  for (std::size_t epoch = 1; epoch <= meta.epochs; ++epoch) {
    auto started = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    auto batches = chunk_indices(order, meta.batch_size);
    double loss_sum = 0.0;
    for (const auto& indices : batches) {
      Batch batch = make_batch(masked_samples, indices);
      loss_sum += supervised_iteration(result.params, config, batch, meta.beta,
                                       optimizer);
    }
    result.log.epochs.push_back(
        finish_epoch(config, result.params, eval_views, epoch,
                     loss_sum / static_cast<double>(batches.size()), started));
  }
  return result;
}

namespace {

std::vector<std::string> metric_columns(const EvalViews& protocol) {
  if (protocol.label_kind == LabelKind::classification) {
    return {"Acc", "Uar", "F1-Score"};
  }
  std::vector<std::string> cols{"MSE", "MAE", "Corr", "Acc-2", "F1-Score"};
  if (protocol.with_acc7) cols.push_back("Acc-7");
  return cols;
}

}  // namespace

void write_trainlog_csv(const TrainLog& log, const EvalViews& protocol,
                        const std::string& path) {
  std::vector<std::string> cols = metric_columns(protocol);
  std::ostringstream out;
  out << "epoch,train_loss,valid_loss,test_loss";
  for (const std::string& c : cols) out << ",valid_" << c;
  for (const std::string& c : cols) out << ",test_" << c;
  out << "\n";
  for (const EpochRecord& r : log.epochs) {
    out << r.epoch << "," << format_double(r.train_loss) << ","
        << format_double(r.valid_loss) << "," << format_double(r.test_loss);
    auto emit = [&](const MetricReport& m) {
      for (const std::string& c : cols) {
        out << ",";
        if (m.has(c)) out << format_double(m.get(c));
      }
    };
    emit(r.valid_metrics);
    emit(r.test_metrics);
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace m3s
