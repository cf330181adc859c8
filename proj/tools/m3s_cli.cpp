// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment CLI on top of the m3s C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "m3s.h"

namespace {

struct ConfigHandle {
  m3s_config* ptr = nullptr;
  ~ConfigHandle() { m3s_config_close(ptr); }
};

int report(m3s_status status, char* text) {
  if (text) {
    std::fputs(text, stdout);
    m3s_string_free(text);
  }
  if (status != M3S_OK) {
    std::fprintf(stderr, "error: %s\n", m3s_last_error());
  }
  return static_cast<int>(status);
}

// "lo:hi" (or "lo-hi") -> {lo, hi}
bool parse_range(const std::string& text, double& lo, double& hi) {
  std::size_t sep = text.find(':');
  if (sep == std::string::npos) sep = text.find('-', 1);
  if (sep == std::string::npos) return false;
  try {
    lo = std::stod(text.substr(0, sep));
    hi = std::stod(text.substr(sep + 1));
  } catch (...) {
    return false;
  }
  return true;
}

int set_all_modalities(m3s_config* cfg, const std::string& prefix,
                       const std::string& range_text) {
  double lo = 0.0, hi = 0.0;
  if (!parse_range(range_text, lo, hi)) {
    std::fprintf(stderr, "error: '%s' is not a lo:hi range\n",
                 range_text.c_str());
    return M3S_ERR_CONFIG;
  }
  std::string value = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  for (const char* modality : {"audio", "video", "language"}) {
    std::string key = prefix + "." + modality;
    if (m3s_config_set(cfg, key.c_str(), value.c_str()) != M3S_OK) {
      std::fprintf(stderr, "error: %s\n", m3s_last_error());
      return M3S_ERR_CONFIG;
    }
  }
  return M3S_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"m3s: meta-sampling training for multimodal prediction with "
               "missing modalities"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  std::vector<std::string> levels;
  std::string train_miss, test_miss;
  std::string report_path;

  auto add_common = [&](CLI::App* cmd, bool with_seed = false) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (default: run.out)");
    if (with_seed) {
      cmd->add_option("--seed", seed, "run seed (default: first of run.seeds)");
    }
  };

  CLI::App* generate = app.add_subcommand(
      "generate", "write a synthetic dataset CSV and print split sizes");
  add_common(generate);

  CLI::App* train = app.add_subcommand(
      "train", "train one method/seed; writes checkpoint and TrainLog CSV");
  add_common(train, true);

  CLI::App* compare = app.add_subcommand(
      "compare", "run the configured methods over the seed list; writes "
                 "report.json and an aligned table");
  add_common(compare);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "repeat compare across missing-rate levels");
  add_common(sweep);
  sweep->add_option("--level", levels,
                    "missing-rate level lo:hi (repeatable; default: "
                    "sweep.levels)");

  CLI::App* adapt = app.add_subcommand(
      "adapt", "train at one missing spec, evaluate at another");
  add_common(adapt);
  adapt->add_option("--train-miss", train_miss,
                    "override the training spec for all modalities (lo:hi)");
  adapt->add_option("--test-miss", test_miss,
                    "override the test spec for all modalities (lo:hi)");

  CLI::App* significance = app.add_subcommand(
      "significance", "Welch t-tests vs ORIG from an existing report.json");
  significance->add_option("--report", report_path, "report.json path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (significance->parsed()) {
    char* text = nullptr;
    return report(m3s_run_significance(report_path.c_str(), &text), text);
  }

  ConfigHandle cfg;
  if (m3s_config_open(config_path.c_str(), &cfg.ptr) != M3S_OK) {
    std::fprintf(stderr, "error: %s\n", m3s_last_error());
    return M3S_ERR_CONFIG;
  }
  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
  char* text = nullptr;

  if (generate->parsed()) {
    return report(m3s_run_generate(cfg.ptr, out, &text), text);
  }
  if (train->parsed()) {
    return report(m3s_run_train(cfg.ptr, out, seed, &text), text);
  }
  if (compare->parsed()) {
    return report(m3s_run_compare(cfg.ptr, out, &text), text);
  }
  if (sweep->parsed()) {
    std::vector<double> bounds;
    for (const std::string& level : levels) {
      double lo = 0.0, hi = 0.0;
      if (!parse_range(level, lo, hi)) {
        std::fprintf(stderr, "error: '%s' is not a lo:hi range\n",
                     level.c_str());
        return M3S_ERR_CONFIG;
      }
      bounds.push_back(lo);
      bounds.push_back(hi);
    }
    return report(m3s_run_sweep(cfg.ptr, bounds.empty() ? nullptr : bounds.data(),
                                bounds.size() / 2, out, &text),
                  text);
  }
  if (adapt->parsed()) {
    if (!train_miss.empty()) {
      int rc = set_all_modalities(cfg.ptr, "miss", train_miss);
      if (rc != M3S_OK) return rc;
    }
    if (!test_miss.empty()) {
      int rc = set_all_modalities(cfg.ptr, "miss.test", test_miss);
      if (rc != M3S_OK) return rc;
    }
    return report(m3s_run_adapt(cfg.ptr, out, &text), text);
  }
  return M3S_ERR_RUNTIME;
}
