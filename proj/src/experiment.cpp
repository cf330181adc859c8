// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "m3s/fsio.hpp"

namespace m3s {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kFrozenTrainSalt = 0x66726f7aULL;  // ORIG train masks

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  raise(ErrorCode::config_invalid,
        "unknown activation '" + name + "' (tanh | relu)");
}

LabelKind task_from_name(const std::string& name) {
  if (name == "regression") return LabelKind::regression;
  if (name == "classification") return LabelKind::classification;
  raise(ErrorCode::config_invalid,
        "unknown task '" + name + "' (regression | classification)");
}

std::vector<std::size_t> to_sizes(const std::vector<std::int64_t>& values,
                                  const std::string& key) {
  std::vector<std::size_t> out;
  out.reserve(values.size());
  for (std::int64_t v : values) {
    if (v < 1) {
      raise(ErrorCode::config_invalid,
            "config key '" + key + "': entries must be >= 1");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

RateRange range_from_list(const std::vector<double>& pair,
                          const std::string& key) {
  if (pair.size() != 2) {
    raise(ErrorCode::config_invalid,
          "config key '" + key + "' must be [lo, hi]");
  }
  return RateRange{pair[0], pair[1]};
}

MissingSpec missing_from_map(const ConfigMap& map, const std::string& prefix,
                             const MissingSpec* fallback) {
  MissingSpec spec;
  const char* names[] = {"audio", "video", "language"};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    std::string key = prefix + "." + names[m];
    if (map.has(key)) {
      spec.ranges[m] = range_from_list(map.get_double_list(key), key);
    } else if (fallback) {
      spec.ranges[m] = fallback->ranges[m];
    }
  }
  spec.validate();
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(ConfigMap& map) {
  ExperimentConfig cfg;

  // data section
  std::string source = map.get_string_or("data.source", "synthetic");
  if (source == "synthetic") {
    cfg.source = DataSource::synthetic;
  } else if (source == "csv") {
    cfg.source = DataSource::csv;
  } else {
    raise(ErrorCode::config_invalid,
          "data.source must be synthetic or csv, got '" + source + "'");
  }
  cfg.csv_path = map.get_string_or("data.path", "");
  if (cfg.source == DataSource::csv && cfg.csv_path.empty()) {
    raise(ErrorCode::config_invalid, "data.source = csv needs data.path");
  }
  if (map.has("data.dims")) {
    auto dims = to_sizes(map.get_int_list("data.dims"), "data.dims");
    if (dims.size() != kNumModalities) {
      raise(ErrorCode::config_invalid, "data.dims must hold three extents");
    }
    std::copy(dims.begin(), dims.end(), cfg.synth.dims.begin());
  }
  if (map.has("data.split_sizes")) {
    auto sizes = to_sizes(map.get_int_list("data.split_sizes"), "data.split_sizes");
    if (sizes.size() != 3) {
      raise(ErrorCode::config_invalid,
            "data.split_sizes must be [train, valid, test]");
    }
    std::copy(sizes.begin(), sizes.end(), cfg.synth.split_sizes.begin());
  }
  cfg.synth.task = task_from_name(map.get_string_or("data.task", "regression"));
  std::int64_t classes = map.get_int_or("data.classes", 4);
  if (classes < 2) raise(ErrorCode::config_invalid, "data.classes must be >= 2");
  cfg.synth.classes = static_cast<std::size_t>(classes);
  if (map.has("data.label_range")) {
    auto range = map.get_double_list("data.label_range");
    if (range.size() != 2 || !(range[0] < range[1])) {
      raise(ErrorCode::config_invalid, "data.label_range must be [lo, hi]");
    }
    cfg.synth.label_lo = range[0];
    cfg.synth.label_hi = range[1];
  }
  cfg.synth.noise = map.get_double_or("data.noise", 0.1);
  cfg.synth.redundancy = map.get_double_or("data.redundancy", 0.8);
  cfg.synth.seed = static_cast<std::uint64_t>(map.get_int_or("data.seed", 7));
  cfg.synth.validate();

  // model section
  cfg.model.input_dims = cfg.synth.dims;  // csv sources overwrite after load
  const char* names[] = {"audio", "video", "language"};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    std::string key = std::string("model.hidden.") + names[m];
    if (map.has(key)) {
      cfg.model.encoder_hidden[m] = to_sizes(map.get_int_list(key), key);
    } else {
      cfg.model.encoder_hidden[m] = {16};
    }
  }
  if (map.has("model.hidden.fusion")) {
    cfg.model.fusion_hidden =
        to_sizes(map.get_int_list("model.hidden.fusion"), "model.hidden.fusion");
  } else {
    cfg.model.fusion_hidden = {16};
  }
  cfg.model.activation =
      activation_from_name(map.get_string_or("model.activation", "tanh"));
  cfg.model.head = cfg.synth.task == LabelKind::regression
                       ? HeadKind::regression
                       : HeadKind::classification;
  cfg.model.classes = cfg.synth.classes;
  cfg.model.validate();

  // train section
  cfg.method = method_from_name(map.get_string_or("train.method", "m3s"));
  cfg.alpha_given = map.has("train.alpha");
  cfg.meta.alpha = map.get_double_or("train.alpha", 2e-4);
  cfg.meta.beta = map.get_double_or("train.beta", 1e-4);
  cfg.meta.inner_steps =
      static_cast<int>(map.get_int_or("train.inner_steps", 1));
  cfg.meta.batch_size =
      static_cast<std::size_t>(map.get_int_or("train.batch_size", 32));
  cfg.meta.epochs = static_cast<std::size_t>(map.get_int_or("train.epochs", 10));
  std::string optimizer = map.get_string_or("train.optimizer", "adam");
  if (optimizer == "adam") {
    cfg.meta.outer_optimizer = OptimizerKind::adam;
  } else if (optimizer == "sgd") {
    cfg.meta.outer_optimizer = OptimizerKind::sgd;
  } else {
    raise(ErrorCode::config_invalid,
          "train.optimizer must be adam or sgd, got '" + optimizer + "'");
  }
  cfg.meta.adam.beta1 = map.get_double_or("train.adam_beta1", 0.9);
  cfg.meta.adam.beta2 = map.get_double_or("train.adam_beta2", 0.999);
  cfg.meta.adam.eps = map.get_double_or("train.adam_eps", 1e-8);
  std::string granularity =
      map.get_string_or("train.granularity", "per_sample");
  if (granularity == "per_sample") {
    cfg.meta.granularity = MaskGranularity::per_sample;
  } else if (granularity == "per_batch") {
    cfg.meta.granularity = MaskGranularity::per_batch;
  } else {
    raise(ErrorCode::config_invalid,
          "train.granularity must be per_sample or per_batch");
  }
  cfg.meta.validate();

  // missing section: miss.* is the training spec, miss.test.* the test-time
  // spec (defaults to the training spec, Table-2 style).
  cfg.train_missing = missing_from_map(map, "miss", nullptr);
  cfg.test_missing = missing_from_map(map, "miss.test", &cfg.train_missing);

  // run section
  if (map.has("run.seeds")) {
    cfg.seeds.clear();
    for (std::int64_t s : map.get_int_list("run.seeds")) {
      if (s < 0) raise(ErrorCode::config_invalid, "run.seeds must be >= 0");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (cfg.seeds.empty()) {
      raise(ErrorCode::config_invalid, "run.seeds must not be empty");
    }
  }
  cfg.eval_seed = static_cast<std::uint64_t>(map.get_int_or("run.eval_seed", 915));
  std::int64_t repeats = map.get_int_or("run.eval_repeats", 3);
  if (repeats < 1) {
    raise(ErrorCode::config_invalid, "run.eval_repeats must be >= 1");
  }
  cfg.eval_repeats = static_cast<std::size_t>(repeats);
  cfg.out_dir = map.get_string_or("run.out", "out");

  // compare section
  if (map.has("compare.methods")) {
    for (const std::string& name : map.get_string_list("compare.methods")) {
      cfg.compare_methods.push_back(method_from_name(name));
    }
    if (cfg.compare_methods.empty()) {
      raise(ErrorCode::config_invalid, "compare.methods must not be empty");
    }
  } else {
    cfg.compare_methods = {TrainMethod::orig, TrainMethod::spl_trn,
                           TrainMethod::m3s};
  }

  // sweep section (flat lo/hi pairs)
  if (map.has("sweep.levels")) {
    auto flat = map.get_double_list("sweep.levels");
    if (flat.empty() || flat.size() % 2 != 0) {
      raise(ErrorCode::config_invalid,
            "sweep.levels must hold lo/hi pairs, e.g. [0.2, 0.4, 0.4, 0.6]");
    }
    for (std::size_t i = 0; i < flat.size(); i += 2) {
      cfg.sweep_levels.push_back(RateRange{flat[i], flat[i + 1]});
    }
  }

  std::vector<std::string> unknown = map.unconsumed_keys();
  if (!unknown.empty()) {
    std::string joined;
    for (const std::string& k : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += k;
    }
    raise(ErrorCode::config_invalid, "unknown config keys: " + joined);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ConfigMap map = ConfigMap::parse_file(path);
  return from_map(map);
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ConfigMap map = ConfigMap::parse(text);
  return from_map(map);
}

void ExperimentConfig::require_method_fields(
    std::span<const TrainMethod> methods) const {
  for (TrainMethod m : methods) {
    if (m == TrainMethod::m3s && !alpha_given) {
      raise(ErrorCode::config_invalid,
            "train.alpha is required when method m3s is run");
    }
  }
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  if (config.source == DataSource::synthetic) {
    return generate_synthetic(config.synth);
  }
  return load_csv(config.csv_path, config.synth.task, config.synth.label_lo,
                  config.synth.label_hi, config.synth.classes);
}

namespace {

ModelConfig model_for_dataset(const ExperimentConfig& config,
                              const Dataset& dataset) {
  ModelConfig model = config.model;
  model.input_dims = dataset.info.dims;
  model.validate();
  return model;
}

TrainResult train_one(const ExperimentConfig& config, const ModelConfig& model,
                      const Dataset& dataset, TrainMethod method,
                      std::uint64_t seed, const EvalViews& views) {
  MetaConfig meta = config.meta;
  meta.seed = seed;
  switch (method) {
    case TrainMethod::m3s:
      return train_m3s(model, dataset, config.train_missing, meta, views);
    case TrainMethod::spl_trn:
      return train_spl_trn(model, dataset, config.train_missing, meta, views);
    case TrainMethod::orig: {
      Dataset frozen = freeze_masks(dataset, config.train_missing,
                                    mix_seed(seed ^ kFrozenTrainSalt));
      return train_orig(model, frozen, meta, views);
    }
  }
  raise(ErrorCode::config_invalid, "unreachable method");
}

/// Left-to-right mean in per_seed order; the JSON invariant test re-runs
/// this exact summation.
MetricReport aggregate_mean(const std::vector<MetricReport>& reports) {
  MetricReport mean;
  if (reports.empty()) return mean;
  for (const auto& [name, first_value] : reports[0].entries()) {
    bool everywhere = true;
    for (const MetricReport& r : reports) {
      if (!r.has(name)) {
        everywhere = false;
        break;
      }
    }
    if (!everywhere) continue;
    double total = 0.0;
    for (const MetricReport& r : reports) total += r.get(name);
    mean.set(name, total / static_cast<double>(reports.size()));
  }
  return mean;
}

MetricReport aggregate_stddev(const std::vector<MetricReport>& reports,
                              const MetricReport& mean) {
  MetricReport stddev;
  if (reports.size() < 2) return stddev;
  for (const auto& [name, m] : mean.entries()) {
    double total = 0.0;
    for (const MetricReport& r : reports) {
      double d = r.get(name) - m;
      total += d * d;
    }
    stddev.set(name, std::sqrt(total / static_cast<double>(reports.size() - 1)));
  }
  return stddev;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << value;
  return os.str();
}

}  // namespace

const MethodOutcome* ComparisonReport::find(TrainMethod method) const {
  for (const MethodOutcome& outcome : methods) {
    if (outcome.method == method) return &outcome;
  }
  return nullptr;
}

ComparisonReport run_comparison(const ExperimentConfig& config,
                                const std::string& out_dir) {
  config.require_method_fields(config.compare_methods);
  Dataset dataset = load_experiment_dataset(config);
  ModelConfig model = model_for_dataset(config, dataset);

  ComparisonReport report;
  report.task = dataset.info.label_kind;
  report.train_missing = config.train_missing;
  report.test_missing = config.test_missing;
  report.eval_seed = config.eval_seed;
  report.epochs = config.meta.epochs;

  bool first_method = true;
  for (TrainMethod method : config.compare_methods) {
    // The evaluation views are re-derived per method and their hashes must
    // agree: every method is scored on identical corrupted test data.
    EvalViews views = make_eval_views(dataset, config.test_missing,
                                      config.eval_seed, config.eval_repeats);
    if (first_method) {
      report.mask_hash = views.mask_hash;
      first_method = false;
    } else if (views.mask_hash != report.mask_hash) {
      raise(ErrorCode::degenerate_sample,
            "frozen evaluation views diverged between methods");
    }

    MethodOutcome outcome;
    outcome.method = method;
    for (std::uint64_t seed : config.seeds) {
      TrainResult result = train_one(config, model, dataset, method, seed, views);
      if (!out_dir.empty()) {
        std::string rel = std::string("curves/") + method_name(method) +
                          "_seed" + std::to_string(seed) + ".csv";
        write_trainlog_csv(result.log, views, out_dir + "/" + rel);
        outcome.curve_files.push_back(rel);
      }
      outcome.seeds.push_back(seed);
      // Model selection: report the epoch with the lowest validation loss
      // (ties resolve to the earliest epoch).
      std::size_t best = 0;
      for (std::size_t e = 1; e < result.log.epochs.size(); ++e) {
        if (result.log.epochs[e].valid_loss <
            result.log.epochs[best].valid_loss) {
          best = e;
        }
      }
      outcome.per_seed.push_back(result.log.epochs[best].test_metrics);
    }
    outcome.mean = aggregate_mean(outcome.per_seed);
    outcome.stddev = aggregate_stddev(outcome.per_seed, outcome.mean);
    report.methods.push_back(std::move(outcome));
  }
  return report;
}

std::vector<std::pair<std::string, double>> p_values_vs_orig(
    const ComparisonReport& report, TrainMethod method) {
  std::vector<std::pair<std::string, double>> out;
  const MethodOutcome* orig = report.find(TrainMethod::orig);
  const MethodOutcome* other = report.find(method);
  if (!orig || !other || method == TrainMethod::orig) return out;
  for (const auto& [name, value] : other->mean.entries()) {
    if (!orig->mean.has(name)) continue;
    std::vector<double> a, b;
    for (const MetricReport& r : other->per_seed) a.push_back(r.get(name));
    for (const MetricReport& r : orig->per_seed) b.push_back(r.get(name));
    try {
      out.emplace_back(name, welch_t_test(a, b).p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_sample) throw;
      // zero-variance stream: significance undefined, skip the metric
    }
  }
  return out;
}

namespace {

std::string method_display(TrainMethod method) {
  switch (method) {
    case TrainMethod::orig: return "ORIG";
    case TrainMethod::spl_trn: return "ORIG+SPL-TRN";
    case TrainMethod::m3s: return "ORIG+M3S";
  }
  return "?";
}

std::vector<std::string> table_columns(const ComparisonReport& report) {
  std::vector<std::string> cols;
  for (const MethodOutcome& outcome : report.methods) {
    for (const auto& [name, value] : outcome.mean.entries()) {
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
        cols.push_back(name);
      }
    }
  }
  return cols;
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

std::string render_comparison_table(const ComparisonReport& report) {
  std::vector<std::string> cols = table_columns(report);
  std::ostringstream os;
  const int name_width = 22, col_width = 12;
  os << std::left << std::setw(name_width) << "method";
  for (const std::string& c : cols) os << std::right << std::setw(col_width) << c;
  os << "\n";
  auto row = [&](const std::string& label, const MetricReport& values,
                 bool signed_fmt) {
    os << std::left << std::setw(name_width) << label;
    for (const std::string& c : cols) {
      os << std::right << std::setw(col_width);
      if (values.has(c)) {
        double v = values.get(c);
        os << (signed_fmt && v > 0 ? "+" + fixed4(v) : fixed4(v));
      } else {
        os << "-";
      }
    }
    os << "\n";
  };
  for (const MethodOutcome& outcome : report.methods) {
    row(method_display(outcome.method), outcome.mean, false);
  }
  const MethodOutcome* orig = report.find(TrainMethod::orig);
  if (orig) {
    for (const MethodOutcome& outcome : report.methods) {
      if (outcome.method == TrainMethod::orig) continue;
      MetricReport delta;
      for (const auto& [name, value] : outcome.mean.entries()) {
        if (orig->mean.has(name)) delta.set(name, value - orig->mean.get(name));
      }
      row("delta_orig(" + std::string(method_name(outcome.method)) + ")", delta,
          true);
    }
    for (const MethodOutcome& outcome : report.methods) {
      if (outcome.method == TrainMethod::orig) continue;
      MetricReport pvals;
      for (const auto& [name, p] : p_values_vs_orig(report, outcome.method)) {
        pvals.set(name, p);
      }
      row("p_vs_orig(" + std::string(method_name(outcome.method)) + ")", pvals,
          false);
    }
  }
  return os.str();
}

namespace {

ordered_json missing_json(const MissingSpec& spec) {
  ordered_json j;
  const char* names[] = {"audio", "video", "language"};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    j[names[m]] = {spec.ranges[m].lo, spec.ranges[m].hi};
  }
  return j;
}

ordered_json metrics_json(const MetricReport& report) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, value] : report.entries()) j[name] = value;
  return j;
}

}  // namespace

std::string comparison_report_json(const ComparisonReport& report) {
  ordered_json j;
  j["protocol"]["task"] =
      report.task == LabelKind::regression ? "regression" : "classification";
  j["protocol"]["train_missing"] = missing_json(report.train_missing);
  j["protocol"]["test_missing"] = missing_json(report.test_missing);
  j["protocol"]["eval_seed"] = report.eval_seed;
  j["protocol"]["eval_mask_hash"] = hex64(report.mask_hash);
  j["protocol"]["epochs"] = report.epochs;

  ordered_json methods = ordered_json::object();
  for (const MethodOutcome& outcome : report.methods) {
    ordered_json m;
    ordered_json per_seed = ordered_json::array();
    for (std::size_t i = 0; i < outcome.per_seed.size(); ++i) {
      ordered_json entry;
      entry["seed"] = outcome.seeds[i];
      entry["metrics"] = metrics_json(outcome.per_seed[i]);
      per_seed.push_back(std::move(entry));
    }
    m["per_seed"] = std::move(per_seed);
    m["mean"] = metrics_json(outcome.mean);
    m["std"] = metrics_json(outcome.stddev);
    if (!outcome.curve_files.empty()) m["curves"] = outcome.curve_files;
    methods[method_name(outcome.method)] = std::move(m);
  }
  j["methods"] = std::move(methods);

  const MethodOutcome* orig = report.find(TrainMethod::orig);
  if (orig) {
    ordered_json deltas = ordered_json::object();
    ordered_json pvals = ordered_json::object();
    for (const MethodOutcome& outcome : report.methods) {
      if (outcome.method == TrainMethod::orig) continue;
      ordered_json d = ordered_json::object();
      for (const auto& [name, value] : outcome.mean.entries()) {
        if (orig->mean.has(name)) d[name] = value - orig->mean.get(name);
      }
      deltas[method_name(outcome.method)] = std::move(d);
      ordered_json p = ordered_json::object();
      for (const auto& [name, pv] : p_values_vs_orig(report, outcome.method)) {
        p[name] = pv;
      }
      pvals[method_name(outcome.method)] = std::move(p);
    }
    j["delta_vs_orig"] = std::move(deltas);
    j["p_vs_orig"] = std::move(pvals);
  }
  return j.dump(2) + "\n";
}

namespace {

std::string resolve_out(const ExperimentConfig& config,
                        const std::string& out_dir) {
  return out_dir.empty() ? config.out_dir : out_dir;
}

}  // namespace

std::string run_generate(const ExperimentConfig& config,
                         const std::string& out_dir) {
  if (config.source != DataSource::synthetic) {
    raise(ErrorCode::config_invalid,
          "generate needs data.source = synthetic");
  }
  Dataset dataset = generate_synthetic(config.synth);
  std::string out = resolve_out(config, out_dir);
  std::string path =
      config.csv_path.empty() ? out + "/dataset.csv" : config.csv_path;
  save_csv(dataset, path);
  std::ostringstream os;
  os << "wrote " << path << "\n"
     << "splits: train=" << dataset.train.size()
     << " valid=" << dataset.valid.size() << " test=" << dataset.test.size()
     << "\n";
  return os.str();
}

std::string run_train(const ExperimentConfig& config, const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override) {
  std::array<TrainMethod, 1> methods{config.method};
  config.require_method_fields(methods);
  Dataset dataset = load_experiment_dataset(config);
  ModelConfig model = model_for_dataset(config, dataset);
  std::uint64_t seed = seed_override ? *seed_override : config.seeds.front();
  EvalViews views = make_eval_views(dataset, config.test_missing,
                                    config.eval_seed, config.eval_repeats);
  TrainResult result =
      train_one(config, model, dataset, config.method, seed, views);

  std::string out = resolve_out(config, out_dir);
  std::string stem =
      std::string(method_name(config.method)) + "_seed" + std::to_string(seed);
  std::string ckpt = out + "/" + stem + ".ckpt";
  std::string log_csv = out + "/" + stem + "_log.csv";
  save_checkpoint(result.params, ckpt);
  write_trainlog_csv(result.log, views, log_csv);

  const EpochRecord& last = result.log.epochs.back();
  std::size_t best = 0;
  for (std::size_t e = 1; e < result.log.epochs.size(); ++e) {
    if (result.log.epochs[e].valid_loss < result.log.epochs[best].valid_loss) {
      best = e;
    }
  }
  const EpochRecord& selected = result.log.epochs[best];
  std::ostringstream os;
  os << "method=" << method_name(config.method) << " seed=" << seed
     << " epochs=" << result.log.epochs.size() << "\n";
  os << "final: train_loss=" << format_double(last.train_loss)
     << " valid_loss=" << format_double(last.valid_loss)
     << " test_loss=" << format_double(last.test_loss) << "\n";
  os << "best epoch " << selected.epoch
     << " by valid loss, test:";
  for (const auto& [name, value] : selected.test_metrics.entries()) {
    os << " " << name << "=" << fixed4(value);
  }
  os << "\n";
  os << "checkpoint: " << ckpt << "\n" << "log: " << log_csv << "\n";
  return os.str();
}

std::string run_compare(const ExperimentConfig& config,
                        const std::string& out_dir) {
  std::string out = resolve_out(config, out_dir);
  ComparisonReport report = run_comparison(config, out);
  std::string table = render_comparison_table(report);
  atomic_write_file(out + "/report.json", comparison_report_json(report));
  atomic_write_file(out + "/report.txt", table);
  std::ostringstream os;
  os << "report: " << out << "/report.json\n" << table;
  return os.str();
}

std::string run_adapt(const ExperimentConfig& config,
                      const std::string& out_dir) {
  // Identical machinery to compare; the point is that train and test specs
  // differ, so label the artifacts accordingly.
  std::string out = resolve_out(config, out_dir);
  ComparisonReport report = run_comparison(config, out);
  std::string table = render_comparison_table(report);
  atomic_write_file(out + "/adapt_report.json", comparison_report_json(report));
  atomic_write_file(out + "/adapt_report.txt", table);
  std::ostringstream os;
  os << "cross-rate adaptation: train "
     << missing_json(report.train_missing).dump() << " -> test "
     << missing_json(report.test_missing).dump() << "\n";
  os << "report: " << out << "/adapt_report.json\n" << table;
  return os.str();
}

std::string run_sweep(const ExperimentConfig& config,
                      std::span<const RateRange> levels,
                      const std::string& out_dir) {
  std::vector<RateRange> effective(levels.begin(), levels.end());
  if (effective.empty()) effective = config.sweep_levels;
  if (effective.empty()) {
    raise(ErrorCode::config_invalid,
          "sweep needs at least one level (--level lo:hi or sweep.levels)");
  }
  std::string out = resolve_out(config, out_dir);
  std::ostringstream os;
  for (const RateRange& level : effective) {
    if (!(0.0 <= level.lo && level.lo <= level.hi && level.hi <= 1.0)) {
      raise(ErrorCode::config_invalid, "sweep level must satisfy 0<=lo<=hi<=1");
    }
    ExperimentConfig leveled = config;
    leveled.train_missing = MissingSpec::uniform_all(level.lo, level.hi);
    leveled.test_missing = leveled.train_missing;
    int lo_pct = static_cast<int>(std::lround(level.lo * 100.0));
    int hi_pct = static_cast<int>(std::lround(level.hi * 100.0));
    std::string level_dir = out + "/level_" + std::to_string(lo_pct) + "_" +
                            std::to_string(hi_pct);
    ComparisonReport report = run_comparison(leveled, level_dir);
    atomic_write_file(level_dir + "/report.json",
                      comparison_report_json(report));
    std::string table = render_comparison_table(report);
    atomic_write_file(level_dir + "/report.txt", table);
    os << "== missing " << lo_pct << "%-" << hi_pct << "%  ("
       << level_dir + "/report.json" << ")\n";
    os << table << "\n";
  }
  return os.str();
}

std::string run_significance(const std::string& report_path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(report_path));
  } catch (const ordered_json::parse_error& e) {
    raise(ErrorCode::parse_error,
          report_path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("methods") || !j["methods"].contains("orig")) {
    raise(ErrorCode::parse_error,
          report_path + " carries no orig method to test against");
  }
  auto seed_values = [&](const ordered_json& method,
                         const std::string& metric) {
    std::vector<double> values;
    for (const auto& entry : method["per_seed"]) {
      if (entry["metrics"].contains(metric)) {
        values.push_back(entry["metrics"][metric].get<double>());
      }
    }
    return values;
  };

  const ordered_json& orig = j["methods"]["orig"];
  std::ostringstream os;
  os << "two-tailed Welch t-test vs ORIG (" << report_path << ")\n";
  for (const auto& [name, method] : j["methods"].items()) {
    if (name == "orig") continue;
    os << name << ":";
    for (const auto& [metric, value] : method["mean"].items()) {
      std::vector<double> a = seed_values(method, metric);
      std::vector<double> b = seed_values(orig, metric);
      if (a.size() < 2 || b.size() < 2) continue;
      try {
        os << " " << metric << "=" << fixed4(welch_t_test(a, b).p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_sample) throw;
        os << " " << metric << "=n/a";
      }
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace m3s
