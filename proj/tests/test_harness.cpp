// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "json.hpp"
#include "m3s/experiment.hpp"
#include "m3s/fsio.hpp"

using json = nlohmann::ordered_json;
using m3s::ExperimentConfig;

namespace {

std::string tiny_experiment_text(const char* extra = "") {
  std::string text =
      "data.dims = [4, 4, 6]\n"
      "data.split_sizes = [48, 16, 16]\n"
      "data.seed = 11\n"
      "model.hidden.audio = [4]\n"
      "model.hidden.video = [4]\n"
      "model.hidden.language = [4]\n"
      "model.hidden.fusion = [4]\n"
      "train.alpha = 0.01\n"
      "train.beta = 0.005\n"
      "train.epochs = 2\n"
      "train.batch_size = 8\n"
      "miss.audio = [0.4, 0.6]\n"
      "miss.video = [0.4, 0.6]\n"
      "miss.language = [0.4, 0.6]\n"
      "run.seeds = [1, 2]\n";
  return text + extra;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("run_generate writes the csv and reports split sizes") {
  TempDir dir("m3s_harness_generate");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  std::string summary = m3s::run_generate(cfg, dir.str());
  CHECK(summary.find("train=48") != std::string::npos);
  CHECK(summary.find("valid=16") != std::string::npos);
  CHECK(summary.find("test=16") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path / "dataset.csv"));

  // byte-identical on rerun
  std::string first = m3s::read_file((dir.path / "dataset.csv").string());
  m3s::run_generate(cfg, dir.str());
  CHECK(m3s::read_file((dir.path / "dataset.csv").string()) == first);
}

TEST_CASE("run_generate refuses csv sources") {
  TempDir dir("m3s_harness_generate_csv");
  ExperimentConfig cfg = ExperimentConfig::from_text(
      tiny_experiment_text("data.source = csv\ndata.path = x.csv\n"));
  CHECK_THROWS_AS(m3s::run_generate(cfg, dir.str()), m3s::Error);
}

TEST_CASE("run_train writes checkpoint and log") {
  TempDir dir("m3s_harness_train");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  std::string summary = m3s::run_train(cfg, dir.str(), 7);
  CHECK(summary.find("seed=7") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path / "m3s_seed7.ckpt"));
  CHECK(std::filesystem::exists(dir.path / "m3s_seed7_log.csv"));

  // the log starts with the documented column header
  std::string log = m3s::read_file((dir.path / "m3s_seed7_log.csv").string());
  CHECK(log.rfind("epoch,train_loss,valid_loss,test_loss", 0) == 0);
}

TEST_CASE("train on a csv dataset round-trips through the loader") {
  TempDir dir("m3s_harness_train_csv");
  ExperimentConfig gen_cfg =
      ExperimentConfig::from_text(tiny_experiment_text());
  m3s::run_generate(gen_cfg, dir.str());
  std::string csv = (dir.path / "dataset.csv").string();
  ExperimentConfig cfg = ExperimentConfig::from_text(
      tiny_experiment_text() + std::string("data.source = csv\ndata.path = ") +
      csv + "\n");
  std::string summary = m3s::run_train(cfg, dir.str(), 1);
  CHECK(summary.find("method=m3s") != std::string::npos);
}

TEST_CASE("comparison runs every method on identical frozen views") {
  TempDir dir("m3s_harness_compare");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  m3s::ComparisonReport report = m3s::run_comparison(cfg, dir.str());
  REQUIRE(report.methods.size() == 3);
  CHECK(report.mask_hash != 0);
  for (const m3s::MethodOutcome& outcome : report.methods) {
    CHECK(outcome.per_seed.size() == 2);
    CHECK(outcome.curve_files.size() == 2);
    for (const std::string& rel : outcome.curve_files) {
      CHECK(std::filesystem::exists(dir.path / rel));
    }
  }
}

TEST_CASE("report means are the exact mean of the stored per-seed values") {
  TempDir dir("m3s_harness_means");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  std::string out = m3s::run_compare(cfg, dir.str());
  json j = json::parse(m3s::read_file((dir.path / "report.json").string()));
  for (const auto& [name, method] : j["methods"].items()) {
    for (const auto& [metric, mean_value] : method["mean"].items()) {
      double total = 0.0;
      std::size_t count = 0;
      for (const auto& entry : method["per_seed"]) {
        total += entry["metrics"][metric].get<double>();
        ++count;
      }
      double recomputed = total / static_cast<double>(count);
      CHECK(recomputed == mean_value.get<double>());
    }
  }
  CHECK(out.find("report") != std::string::npos);
}

TEST_CASE("compare output is byte-identical across reruns") {
  TempDir dir_a("m3s_harness_det_a");
  TempDir dir_b("m3s_harness_det_b");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  m3s::run_compare(cfg, dir_a.str());
  m3s::run_compare(cfg, dir_b.str());
  CHECK(m3s::read_file((dir_a.path / "report.json").string()) ==
        m3s::read_file((dir_b.path / "report.json").string()));
  CHECK(m3s::read_file((dir_a.path / "report.txt").string()) ==
        m3s::read_file((dir_b.path / "report.txt").string()));
  CHECK(m3s::read_file((dir_a.path / "curves/m3s_seed1.csv").string()) ==
        m3s::read_file((dir_b.path / "curves/m3s_seed1.csv").string()));
}

TEST_CASE("single-method comparison emits no significance rows") {
  TempDir dir("m3s_harness_single");
  ExperimentConfig cfg = ExperimentConfig::from_text(
      tiny_experiment_text("compare.methods = [spl_trn]\n"));
  m3s::ComparisonReport report = m3s::run_comparison(cfg, "");
  CHECK(report.methods.size() == 1);
  std::string table = m3s::render_comparison_table(report);
  CHECK(table.find("p_vs_orig") == std::string::npos);
  std::string js = m3s::comparison_report_json(report);
  CHECK(js.find("p_vs_orig") == std::string::npos);
}

TEST_CASE("identical per-seed streams give delta 0 and p 1") {
  // orig compared against itself under a second name is impossible, so use
  // the p-value helper directly on a doctored report.
  TempDir dir("m3s_harness_identical");
  ExperimentConfig cfg = ExperimentConfig::from_text(
      tiny_experiment_text("compare.methods = [orig, spl_trn]\n"));
  m3s::ComparisonReport report = m3s::run_comparison(cfg, "");
  REQUIRE(report.methods.size() == 2);
  // overwrite spl_trn's stream with orig's
  report.methods[1].per_seed = report.methods[0].per_seed;
  report.methods[1].mean = report.methods[0].mean;
  auto pvals = m3s::p_values_vs_orig(report, m3s::TrainMethod::spl_trn);
  for (const auto& [metric, p] : pvals) {
    CHECK(p == doctest::Approx(1.0).epsilon(1e-9));
  }
  std::string table = m3s::render_comparison_table(report);
  CHECK(table.find("delta_orig") != std::string::npos);
}

TEST_CASE("adapt with equal specs reduces to compare") {
  TempDir dir_c("m3s_harness_adapt_c");
  TempDir dir_a("m3s_harness_adapt_a");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  m3s::run_compare(cfg, dir_c.str());
  m3s::run_adapt(cfg, dir_a.str());
  CHECK(m3s::read_file((dir_c.path / "report.json").string()) ==
        m3s::read_file((dir_a.path / "adapt_report.json").string()));
}

TEST_CASE("adapt trains at one spec and scores at another") {
  TempDir dir("m3s_harness_adapt");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text(
      "miss.test.audio = [0.6, 0.8]\n"
      "miss.test.video = [0.6, 0.8]\n"
      "miss.test.language = [0.6, 0.8]\n"));
  std::string summary = m3s::run_adapt(cfg, dir.str());
  CHECK(summary.find("cross-rate") != std::string::npos);
  json j =
      json::parse(m3s::read_file((dir.path / "adapt_report.json").string()));
  CHECK(j["protocol"]["train_missing"]["audio"][0].get<double>() == 0.4);
  CHECK(j["protocol"]["test_missing"]["audio"][0].get<double>() == 0.6);
}

TEST_CASE("test spec zero evaluates on clean data") {
  TempDir dir("m3s_harness_cleantest");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text(
      "miss.test.audio = [0, 0]\n"
      "miss.test.video = [0, 0]\n"
      "miss.test.language = [0, 0]\n"));
  m3s::ComparisonReport report = m3s::run_comparison(cfg, "");
  CHECK(report.methods.size() == 3);  // runs cleanly end to end
}

TEST_CASE("sweep emits one report per level and rejects empty level lists") {
  TempDir dir("m3s_harness_sweep");
  ExperimentConfig cfg = ExperimentConfig::from_text(
      tiny_experiment_text("run.seeds = [1, 2]\ncompare.methods = [orig, m3s]\n"));
  std::vector<m3s::RateRange> levels{{0.2, 0.4}, {0.5, 0.5}};
  std::string summary = m3s::run_sweep(cfg, levels, dir.str());
  CHECK(std::filesystem::exists(dir.path / "level_20_40/report.json"));
  CHECK(std::filesystem::exists(dir.path / "level_50_50/report.json"));
  CHECK(summary.find("20%-40%") != std::string::npos);

  ExperimentConfig no_levels =
      ExperimentConfig::from_text(tiny_experiment_text());
  CHECK_THROWS_AS(m3s::run_sweep(no_levels, {}, dir.str()), m3s::Error);
}

TEST_CASE("significance recomputes p-values from a written report") {
  TempDir dir("m3s_harness_sig");
  ExperimentConfig cfg = ExperimentConfig::from_text(tiny_experiment_text());
  m3s::run_compare(cfg, dir.str());
  std::string text = m3s::run_significance((dir.path / "report.json").string());
  CHECK(text.find("Welch") != std::string::npos);
  CHECK(text.find("m3s") != std::string::npos);
  CHECK_THROWS_AS(m3s::run_significance((dir.path / "missing.json").string()),
                  m3s::Error);
}

TEST_CASE("compare requires alpha when m3s is in the method set") {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "train.epochs = 1\n"
      "run.seeds = [1, 2]\n");
  cfg.meta.epochs = 1;
  CHECK_THROWS_WITH_AS(m3s::run_comparison(cfg, ""),
                       doctest::Contains("train.alpha"), m3s::Error);
}
