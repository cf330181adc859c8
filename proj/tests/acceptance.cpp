// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "m3s/experiment.hpp"
#include "m3s/fsio.hpp"
#include "m3s/gradcheck.hpp"
#include "oracle_helpers.hpp"

using m3s::Batch;
using m3s::Dataset;
using m3s::ExperimentConfig;
using m3s::Graph;
using m3s::MetaConfig;
using m3s::MissingSpec;
using m3s::ModelConfig;
using m3s::OuterOptimizer;
using m3s::Parameters;
using m3s::Rng;
using m3s::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Runner {
  int failures = 0;

  void run(int number, const std::string& name,
           const std::function<Outcome()>& fn) {
    auto started = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    std::printf("[%s] C%d %s: %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL",
                number, name.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---- C1: gradient correctness on random fusion models -----------------------

Outcome criterion_gradients() {
  auto started = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg;
    cfg.input_dims = {1 + rng.uniform_index(4), 1 + rng.uniform_index(4),
                      1 + rng.uniform_index(5)};
    for (auto& hidden : cfg.encoder_hidden) {
      hidden = {1 + rng.uniform_index(4)};
    }
    cfg.fusion_hidden = {1 + rng.uniform_index(4)};
    cfg.head = trial % 2 == 0 ? m3s::HeadKind::regression
                              : m3s::HeadKind::classification;
    cfg.classes = 3;
    cfg.activation =
        trial % 4 < 2 ? m3s::Activation::tanh : m3s::Activation::relu;

    std::size_t batch_size = 1 + rng.uniform_index(4);
    Batch batch;
    auto fill = [&](std::size_t width) {
      Tensor t = Tensor::zeros({batch_size, width});
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
      return t;
    };
    batch.audio = fill(cfg.input_dims[0]);
    batch.video = fill(cfg.input_dims[1]);
    batch.language = fill(cfg.input_dims[2]);
    batch.labels.resize(batch_size);
    for (double& label : batch.labels) {
      label = cfg.head == m3s::HeadKind::regression
                  ? rng.uniform(-1, 1)
                  : static_cast<double>(rng.uniform_index(cfg.classes));
    }

    Parameters params = m3s::init_params(cfg, 1000 + trial);
    std::vector<Tensor> tensors;
    for (std::size_t i = 0; i < params.size(); ++i) {
      tensors.push_back(params.tensor(i));
    }
    auto build = [&](Graph& g, std::span<const Graph::NodeId> p) {
      std::array<Graph::NodeId, 3> enc{};
      std::size_t next = 0;
      auto layer = [&](Graph::NodeId x, bool linear) {
        auto z = g.add(g.matmul(x, p[next]), p[next + 1]);
        next += 2;
        if (linear) return z;
        return cfg.activation == m3s::Activation::tanh ? g.tanh(z) : g.relu(z);
      };
      enc[0] = g.input(batch.audio);
      enc[1] = g.input(batch.video);
      enc[2] = g.input(batch.language);
      for (std::size_t m = 0; m < 3; ++m) {
        for (std::size_t l = 0; l < cfg.encoder_hidden[m].size(); ++l) {
          enc[m] = layer(enc[m], false);
        }
      }
      auto fused = g.concat(enc);
      for (std::size_t l = 0; l < cfg.fusion_hidden.size(); ++l) {
        fused = layer(fused, false);
      }
      return m3s::attach_loss(g, cfg, layer(fused, true), batch.labels);
    };
    auto report = m3s::grad_check(build, tensors, 1e-5, 1e-4);
    worst = std::max(worst, report.max_rel_error);
    if (!report.pass) {
      return {false, "model " + std::to_string(trial) + " rel err " +
                         fmt(report.max_rel_error) + " > 1e-4"};
    }
  }
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  if (seconds >= 30.0) {
    return {false, "took " + fmt(seconds) + "s, budget 30s"};
  }
  return {true, "20 models, worst rel err " + fmt(worst)};
}

// ---- C2: masking exactness ---------------------------------------------------

Outcome criterion_masking() {
  Rng rng(7);
  for (std::size_t t = 1; t <= 64; ++t) {
    for (int ri = 0; ri <= 10; ++ri) {
      double r = 0.1 * ri;
      m3s::SpanMask span = m3s::plan_mask(t, r, rng);
      std::size_t expected =
          static_cast<std::size_t>(std::floor(static_cast<double>(t) * r));
      if (span.length != expected) {
        return {false, "T=" + std::to_string(t) + " r=" + fmt(r) + ": k=" +
                           std::to_string(span.length) + " != floor=" +
                           std::to_string(expected)};
      }
      std::vector<double> input(t, 1.0);
      std::vector<double> masked = m3s::apply_mask(input, span);
      std::size_t zeros = 0, first = t, last = 0;
      for (std::size_t i = 0; i < t; ++i) {
        if (masked[i] == 0.0) {
          ++zeros;
          first = std::min(first, i);
          last = i;
        } else if (masked[i] != 1.0) {
          return {false, "off-span value changed"};
        }
      }
      if (zeros != expected || (zeros > 0 && last - first + 1 != zeros)) {
        return {false, "span not one contiguous run at T=" + std::to_string(t) +
                           " r=" + fmt(r)};
      }
    }
  }

  // start-position uniformity at T=7, k=3 over 1e5 draws
  Rng chi_rng(2718);
  std::array<int, 5> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    m3s::SpanMask span = m3s::plan_mask(7, 0.5, chi_rng);
    counts[span.start] += 1;
  }
  double chi2 = 0.0;
  const double expected = draws / 5.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // upper critical value of chi-square, df=4, significance 0.01
  if (chi2 >= 13.2767) {
    return {false, "chi-square " + fmt(chi2) + " >= 13.2767"};
  }
  return {true, "grid exact; chi-square " + fmt(chi2) + " < 13.2767"};
}

// ---- C3: analytic meta-step oracle ------------------------------------------

Outcome criterion_meta_oracle() {
  auto quadratic = [](const Parameters& params) {
    Graph g;
    auto t = g.input(params.tensor(0));
    auto loss = g.scale(g.sum(g.square(t)), 0.5);
    g.backward(loss);
    m3s::GradEval eval;
    eval.loss = g.value(loss)[0];
    eval.grads.push_back(g.gradient(t));
    return eval;
  };
  Parameters theta;
  theta.push("theta", Tensor::scalar(1.0));

  const double expected_adapted[] = {0.9, 0.81};
  const double expected_meta[] = {0.91, 0.919};
  for (int k = 1; k <= 2; ++k) {
    Parameters adapted = m3s::inner_adapt(theta, quadratic, 0.1, k);
    if (std::fabs(adapted.tensor(0)[0] - expected_adapted[k - 1]) > 1e-10) {
      return {false, "K=" + std::to_string(k) + " theta* " +
                         fmt(adapted.tensor(0)[0]) + " != " +
                         fmt(expected_adapted[k - 1])};
    }
    OuterOptimizer sgd(m3s::OptimizerKind::sgd, m3s::AdamSettings{});
    Parameters updated = m3s::meta_update(theta, adapted, quadratic, 0.1, sgd);
    if (std::fabs(updated.tensor(0)[0] - expected_meta[k - 1]) > 1e-10) {
      return {false, "K=" + std::to_string(k) + " theta " +
                         fmt(updated.tensor(0)[0]) + " != " +
                         fmt(expected_meta[k - 1])};
    }
  }
  return {true, "theta* in {0.9, 0.81}, meta theta in {0.91, 0.919} at 1e-10"};
}

// ---- C4: trainer degeneracies ------------------------------------------------

ModelConfig alignment_model() {
  ModelConfig cfg;
  cfg.input_dims = {6, 5, 8};
  cfg.encoder_hidden = {{{6}, {6}, {6}}};
  cfg.fusion_hidden = {6};
  return cfg;
}

Dataset alignment_dataset() {
  m3s::SyntheticConfig gen;
  gen.dims = {6, 5, 8};
  gen.split_sizes = {128, 24, 24};
  gen.seed = 51;
  return m3s::generate_synthetic(gen);
}

Outcome criterion_degeneracies() {
  ModelConfig model = alignment_model();
  Dataset data = alignment_dataset();

  // (a) alpha=0 meta iterations equal plain iterations, per parameter, when
  // both consume the same masked query batches.
  {
    MissingSpec spec = MissingSpec::uniform_all(0.4, 0.6);
    MetaConfig meta;
    meta.alpha = 0.0;
    meta.beta = 0.004;
    meta.batch_size = 16;
    Parameters p_meta = m3s::init_params(model, 5);
    Parameters p_plain = p_meta;
    OuterOptimizer o_meta(meta.outer_optimizer, meta.adam);
    OuterOptimizer o_plain(meta.outer_optimizer, meta.adam);
    Rng order_rng(61), mask_rng(62);
    std::vector<std::size_t> ids(data.train.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    for (int step = 0; step < 60; ++step) {
      order_rng.shuffle(ids);
      std::vector<std::size_t> support_ids(ids.begin(), ids.begin() + 16);
      std::vector<std::size_t> query_ids(ids.begin() + 16, ids.begin() + 32);
      Batch support = m3s::transform_batch(
          m3s::make_batch(data.train, support_ids), spec, mask_rng);
      Batch query = m3s::transform_batch(m3s::make_batch(data.train, query_ids),
                                         spec, mask_rng);
      m3s::m3s_iteration(p_meta, model, support, query, meta, o_meta);
      m3s::supervised_iteration(p_plain, model, query, meta.beta, o_plain);
      for (std::size_t i = 0; i < p_meta.size(); ++i) {
        for (std::size_t j = 0; j < p_meta.tensor(i).size(); ++j) {
          double diff =
              std::fabs(p_meta.tensor(i)[j] - p_plain.tensor(i)[j]);
          if (diff > 1e-12) {
            return {false, "(a) step " + std::to_string(step) + " param " +
                               p_meta.name(i) + " diff " + fmt(diff)};
          }
        }
      }
    }
  }

  // (b) zero-rate masks + alpha=0: the three regimes collapse onto one
  // trajectory when fed the same batch sequence.
  {
    MissingSpec zero = MissingSpec::none();
    Dataset frozen = m3s::freeze_masks(data, zero, 9);
    MetaConfig meta;
    meta.alpha = 0.0;
    meta.beta = 0.004;
    Parameters p_m3s = m3s::init_params(model, 6);
    Parameters p_spl = p_m3s;
    Parameters p_orig = p_m3s;
    OuterOptimizer o1(meta.outer_optimizer, meta.adam);
    OuterOptimizer o2(meta.outer_optimizer, meta.adam);
    OuterOptimizer o3(meta.outer_optimizer, meta.adam);
    Rng order_rng(71), mask_rng(72);
    std::vector<std::size_t> ids(data.train.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    for (int step = 0; step < 40; ++step) {
      order_rng.shuffle(ids);
      std::vector<std::size_t> support_ids(ids.begin(), ids.begin() + 16);
      std::vector<std::size_t> batch_ids(ids.begin() + 16, ids.begin() + 32);
      Batch raw = m3s::make_batch(data.train, batch_ids);
      Batch support = m3s::transform_batch(
          m3s::make_batch(data.train, support_ids), zero, mask_rng);
      Batch query = m3s::transform_batch(raw, zero, mask_rng);
      m3s::m3s_iteration(p_m3s, model, support, query, meta, o1);
      Batch spl_view = m3s::transform_batch(raw, zero, mask_rng);
      m3s::supervised_iteration(p_spl, model, spl_view, meta.beta, o2);
      std::vector<m3s::MaskPlan> plans;
      for (std::size_t id : batch_ids) plans.push_back(frozen.frozen_train[id]);
      Batch orig_view = m3s::apply_plans(raw, plans);
      m3s::supervised_iteration(p_orig, model, orig_view, meta.beta, o3);
      if (!p_m3s.equals(p_spl) || !p_spl.equals(p_orig)) {
        return {false, "(b) trajectories diverged at step " +
                           std::to_string(step)};
      }
    }
  }
  return {true, "alpha=0 m3s==spl_trn at 1e-12/param over 60 steps; "
                "zero-rate trajectories identical over 40 steps"};
}

// ---- C5: metric oracles ------------------------------------------------------

/// Independent fixed-grid Simpson integration of the t density over
/// [-|t|, |t|]; two-tailed p = 1 - integral.
double reference_p_by_quadrature(double t, double dof) {
  double a = -std::fabs(t), b = std::fabs(t);
  const int intervals = 200000;  // even
  double h = (b - a) / intervals;
  double total = m3s::student_t_pdf(a, dof) + m3s::student_t_pdf(b, dof);
  for (int i = 1; i < intervals; ++i) {
    double x = a + h * i;
    total += m3s::student_t_pdf(x, dof) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return 1.0 - total * h / 3.0;
}

Outcome criterion_metric_oracles() {
  // classification metrics against the brute-force confusion reference
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    int classes = 2 + static_cast<int>(rng.uniform_index(5));
    std::size_t n = 1 + rng.uniform_index(50);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.uniform_index(classes));
      pred[i] = static_cast<int>(rng.uniform_index(classes));
    }
    auto ours = m3s::classification_metrics(pred, truth,
                                            static_cast<std::size_t>(classes));
    auto ref = oracle::confusion_reference(pred, truth, classes);
    if (ours.accuracy != ref.accuracy ||
        std::fabs(ours.uar - ref.uar) > 1e-14 ||
        std::fabs(ours.weighted_f1 - ref.weighted_f1) > 1e-14) {
      return {false, "classification mismatch on case " + std::to_string(trial)};
    }
  }

  // pearson worked example against direct formula evaluation
  std::vector<double> x{1, 2, 3}, y{2, 4, 7};
  double corr = m3s::pearson(x, y);
  double mx = 2.0, my = 13.0 / 3.0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  double direct = sxy / std::sqrt(sxx * syy);
  if (std::fabs(corr - 0.9934) > 1e-3 || std::fabs(corr - direct) > 1e-12) {
    return {false, "pearson " + fmt(corr) + " off the 0.9934 oracle"};
  }

  // Welch p against an independent quadrature oracle
  struct TCase {
    std::vector<double> a, b;
  };
  std::vector<TCase> cases{
      {{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}},
      {{0.1, 0.2, 0.15, 0.3}, {0.4, 0.5, 0.35, 0.55, 0.45}},
      {{-1, 0, 1, 2}, {5, 6, 7, 8, 9, 10}},
  };
  double worst = 0.0;
  for (const TCase& c : cases) {
    m3s::WelchResult r = m3s::welch_t_test(c.a, c.b);
    double ref = reference_p_by_quadrature(r.t, r.dof);
    worst = std::max(worst, std::fabs(r.p - ref));
    if (std::fabs(r.p - ref) > 1e-6) {
      return {false, "welch p " + fmt(r.p) + " vs quadrature oracle " +
                         fmt(ref)};
    }
  }
  // pinned trivial cases
  std::vector<double> same{1, 2, 3, 4};
  if (std::fabs(m3s::welch_t_test(same, same).p - 1.0) > 1e-9) {
    return {false, "identical samples must give p = 1"};
  }
  std::vector<double> low{0.01, -0.02, 0.015, -0.005};
  std::vector<double> high{10.01, 9.98, 10.02, 10.0};
  if (m3s::welch_t_test(low, high).p >= 1e-4) {
    return {false, "separated samples must give p < 1e-4"};
  }
  double example = m3s::welch_t_test(cases[0].a, cases[0].b).p;
  if (std::fabs(example - 0.347) > 2e-3) {
    return {false, "p " + fmt(example) + " != 0.347 on the worked example"};
  }
  return {true, "confusion exact on 1000 cases; pearson 0.9934; welch vs "
                "quadrature oracle within " +
                    fmt(worst)};
}

// ---- C6/C7: directional reproduction ----------------------------------------

std::string acceptance_experiment_text() {
  return
      "data.dims = [20, 20, 30]\n"
      "data.split_sizes = [1368, 456, 457]\n"
      "data.noise = 0.1\n"
      "data.redundancy = 0.8\n"
      "data.seed = 7\n"
      "model.hidden.audio = [16]\n"
      "model.hidden.video = [16]\n"
      "model.hidden.language = [16]\n"
      "model.hidden.fusion = [16]\n"
      "model.activation = tanh\n"
      "train.alpha = 0.02\n"
      "train.beta = 0.004\n"
      "train.inner_steps = 1\n"
      "train.batch_size = 32\n"
      "train.epochs = 40\n"
      "train.optimizer = adam\n"
      "miss.audio = [0.4, 0.6]\n"
      "miss.video = [0.4, 0.6]\n"
      "miss.language = [0.4, 0.6]\n"
      "run.seeds = [1, 2, 3, 4, 5]\n";
}

std::vector<double> per_seed_mse(const m3s::ComparisonReport& report,
                                 m3s::TrainMethod method) {
  const m3s::MethodOutcome* outcome = report.find(method);
  std::vector<double> values;
  for (const m3s::MetricReport& r : outcome->per_seed) {
    values.push_back(r.get("MSE"));
  }
  return values;
}

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

Outcome criterion_table2_trend() {
  auto started = std::chrono::steady_clock::now();
  ExperimentConfig cfg =
      ExperimentConfig::from_text(acceptance_experiment_text());
  m3s::ComparisonReport report = m3s::run_comparison(cfg, "");
  std::vector<double> orig = per_seed_mse(report, m3s::TrainMethod::orig);
  std::vector<double> spl = per_seed_mse(report, m3s::TrainMethod::spl_trn);
  std::vector<double> meta = per_seed_mse(report, m3s::TrainMethod::m3s);
  double mean_orig = mean_of(orig), mean_spl = mean_of(spl),
         mean_meta = mean_of(meta);
  int wins = 0;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (meta[i] < orig[i]) ++wins;
  }
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  std::string detail = "mean test MSE m3s=" + fmt(mean_meta) +
                       " spl_trn=" + fmt(mean_spl) + " orig=" + fmt(mean_orig) +
                       ", m3s beats orig in " + std::to_string(wins) + "/5";
  if (seconds >= 300.0) {
    return {false, detail + "; took " + fmt(seconds) + "s >= 300s"};
  }
  bool ordered = mean_meta <= mean_spl && mean_spl <= mean_orig;
  return {ordered && wins >= 4, detail};
}

Outcome criterion_table4_adaptation() {
  ExperimentConfig cfg =
      ExperimentConfig::from_text(acceptance_experiment_text() +
                                  std::string("miss.test.audio = [0.6, 0.8]\n"
                                              "miss.test.video = [0.6, 0.8]\n"
                                              "miss.test.language = [0.6, 0.8]\n"
                                              "compare.methods = [orig, m3s]\n"));
  m3s::ComparisonReport report = m3s::run_comparison(cfg, "");
  double mean_orig = mean_of(per_seed_mse(report, m3s::TrainMethod::orig));
  double mean_meta = mean_of(per_seed_mse(report, m3s::TrainMethod::m3s));
  std::string detail = "train 40-60 test 60-80: mean test MSE m3s=" +
                       fmt(mean_meta) + " orig=" + fmt(mean_orig);
  return {mean_meta < mean_orig, detail};
}

// ---- C8: byte-level determinism ----------------------------------------------

Outcome criterion_determinism() {
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "m3s_acceptance_det";
  fs::remove_all(base);
  fs::create_directories(base);
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "data.dims = [6, 6, 8]\n"
      "data.split_sizes = [96, 24, 24]\n"
      "model.hidden.audio = [6]\n"
      "model.hidden.video = [6]\n"
      "model.hidden.language = [6]\n"
      "model.hidden.fusion = [6]\n"
      "train.alpha = 0.01\n"
      "train.beta = 0.004\n"
      "train.epochs = 3\n"
      "train.batch_size = 16\n"
      "miss.audio = [0.4, 0.6]\n"
      "miss.video = [0.4, 0.6]\n"
      "miss.language = [0.4, 0.6]\n"
      "run.seeds = [1, 2, 3]\n");
  std::string dir_a = (base / "a").string();
  std::string dir_b = (base / "b").string();
  m3s::run_compare(cfg, dir_a);
  m3s::run_compare(cfg, dir_b);

  std::vector<std::string> files{"report.json", "report.txt"};
  for (const char* method : {"orig", "spl_trn", "m3s"}) {
    for (int seed = 1; seed <= 3; ++seed) {
      files.push_back(std::string("curves/") + method + "_seed" +
                      std::to_string(seed) + ".csv");
    }
  }
  for (const std::string& rel : files) {
    std::string a = m3s::read_file(dir_a + "/" + rel);
    std::string b = m3s::read_file(dir_b + "/" + rel);
    if (a != b) {
      fs::remove_all(base);
      return {false, rel + " differs between identical runs"};
    }
  }
  fs::remove_all(base);
  return {true, std::to_string(files.size()) +
                    " output files byte-identical across reruns"};
}

}  // namespace

int main() {
  Runner runner;
  runner.run(1, "gradient correctness vs central finite differences",
             criterion_gradients);
  runner.run(2, "masking exactness and start uniformity", criterion_masking);
  runner.run(3, "meta-step analytic oracle", criterion_meta_oracle);
  runner.run(4, "trainer degeneracies", criterion_degeneracies);
  runner.run(5, "metric oracles", criterion_metric_oracles);
  runner.run(6, "directional trend: m3s <= spl_trn <= orig at 40-60%",
             criterion_table2_trend);
  runner.run(7, "cross-rate adaptation: m3s < orig at 60-80% test",
             criterion_table4_adaptation);
  runner.run(8, "byte-level determinism of compare", criterion_determinism);
  if (runner.failures > 0) {
    std::printf("%d criterion(s) failed\n", runner.failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
