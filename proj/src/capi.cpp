// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <span>
#include <string>

#include "m3s/experiment.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

m3s_status fail(const std::exception& e, m3s_status code) {
  g_last_error = e.what();
  return code;
}

m3s_status status_for(const m3s::Error& e) {
  return e.code() == m3s::ErrorCode::config_invalid ? M3S_ERR_CONFIG
                                                    : M3S_ERR_RUNTIME;
}

template <typename Fn>
m3s_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return M3S_OK;
  } catch (const m3s::Error& e) {
    return fail(e, status_for(e));
  } catch (const std::exception& e) {
    return fail(e, M3S_ERR_RUNTIME);
  }
}

void put_text(char** out_text, const std::string& text) {
  if (out_text) *out_text = dup_string(text);
}

}  // namespace

struct m3s_config {
  m3s::ConfigMap map;
  m3s::ExperimentConfig parsed;
};

extern "C" {

unsigned m3s_abi_version(void) { return 1; }

const char* m3s_last_error(void) { return g_last_error.c_str(); }

void m3s_string_free(char* text) { std::free(text); }

m3s_status m3s_config_open(const char* path, m3s_config** out) {
  if (!path || !out) {
    g_last_error = "m3s_config_open: null argument";
    return M3S_ERR_CONFIG;
  }
  *out = nullptr;
  try {
    auto cfg = std::make_unique<m3s_config>();
    cfg->map = m3s::ConfigMap::parse_file(path);
    cfg->parsed = m3s::ExperimentConfig::from_map(cfg->map);
    *out = cfg.release();
    g_last_error.clear();
    return M3S_OK;
  } catch (const std::exception& e) {
    // any failure to load/parse/validate the file is a configuration error
    g_last_error = e.what();
    return M3S_ERR_CONFIG;
  }
}

m3s_status m3s_config_from_text(const char* text, m3s_config** out) {
  if (!text || !out) {
    g_last_error = "m3s_config_from_text: null argument";
    return M3S_ERR_CONFIG;
  }
  *out = nullptr;
  try {
    auto cfg = std::make_unique<m3s_config>();
    cfg->map = m3s::ConfigMap::parse(text);
    cfg->parsed = m3s::ExperimentConfig::from_map(cfg->map);
    *out = cfg.release();
    g_last_error.clear();
    return M3S_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return M3S_ERR_CONFIG;
  }
}

m3s_status m3s_config_set(m3s_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "m3s_config_set: null argument";
    return M3S_ERR_CONFIG;
  }
  try {
    m3s::ConfigMap updated = cfg->map;
    updated.set(key, value);
    cfg->parsed = m3s::ExperimentConfig::from_map(updated);
    cfg->map = std::move(updated);
    g_last_error.clear();
    return M3S_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return M3S_ERR_CONFIG;
  }
}

void m3s_config_close(m3s_config* cfg) { delete cfg; }

m3s_status m3s_run_generate(const m3s_config* cfg, const char* out_dir,
                            char** out_text) {
  if (!cfg) {
    g_last_error = "null config";
    return M3S_ERR_CONFIG;
  }
  return guarded([&] {
    put_text(out_text,
             m3s::run_generate(cfg->parsed, out_dir ? out_dir : ""));
  });
}

m3s_status m3s_run_train(const m3s_config* cfg, const char* out_dir,
                         int64_t seed, char** out_text) {
  if (!cfg) {
    g_last_error = "null config";
    return M3S_ERR_CONFIG;
  }
  return guarded([&] {
    std::optional<std::uint64_t> seed_override;
    if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);
    put_text(out_text,
             m3s::run_train(cfg->parsed, out_dir ? out_dir : "", seed_override));
  });
}

m3s_status m3s_run_compare(const m3s_config* cfg, const char* out_dir,
                           char** out_text) {
  if (!cfg) {
    g_last_error = "null config";
    return M3S_ERR_CONFIG;
  }
  return guarded([&] {
    put_text(out_text, m3s::run_compare(cfg->parsed, out_dir ? out_dir : ""));
  });
}

m3s_status m3s_run_adapt(const m3s_config* cfg, const char* out_dir,
                         char** out_text) {
  if (!cfg) {
    g_last_error = "null config";
    return M3S_ERR_CONFIG;
  }
  return guarded([&] {
    put_text(out_text, m3s::run_adapt(cfg->parsed, out_dir ? out_dir : ""));
  });
}

m3s_status m3s_run_sweep(const m3s_config* cfg, const double* level_bounds,
                         size_t level_count, const char* out_dir,
                         char** out_text) {
  if (!cfg) {
    g_last_error = "null config";
    return M3S_ERR_CONFIG;
  }
  if (level_count > 0 && !level_bounds) {
    g_last_error = "m3s_run_sweep: null level_bounds";
    return M3S_ERR_CONFIG;
  }
  return guarded([&] {
    std::vector<m3s::RateRange> levels;
    levels.reserve(level_count);
    for (size_t i = 0; i < level_count; ++i) {
      levels.push_back(
          m3s::RateRange{level_bounds[2 * i], level_bounds[2 * i + 1]});
    }
    put_text(out_text,
             m3s::run_sweep(cfg->parsed, levels, out_dir ? out_dir : ""));
  });
}

m3s_status m3s_run_significance(const char* report_path, char** out_text) {
  if (!report_path) {
    g_last_error = "null report path";
    return M3S_ERR_CONFIG;
  }
  return guarded(
      [&] { put_text(out_text, m3s::run_significance(report_path)); });
}

m3s_status m3s_metric_mae(const double* preds, const double* labels, size_t n,
                          double* out) {
  if (!preds || !labels || !out) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] { *out = m3s::mae({preds, n}, {labels, n}); });
}

m3s_status m3s_metric_pearson(const double* preds, const double* labels,
                              size_t n, double* out) {
  if (!preds || !labels || !out) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] { *out = m3s::pearson({preds, n}, {labels, n}); });
}

m3s_status m3s_metric_acc2(const double* preds, const double* labels, size_t n,
                           double* out) {
  if (!preds || !labels || !out) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] { *out = m3s::acc2({preds, n}, {labels, n}); });
}

m3s_status m3s_metric_acc7(const double* preds, const double* labels, size_t n,
                           double* out) {
  if (!preds || !labels || !out) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] { *out = m3s::acc7({preds, n}, {labels, n}); });
}

m3s_status m3s_classification_metrics(const int* preds, const int* labels,
                                      size_t n, size_t classes, double* acc,
                                      double* uar, double* weighted_f1) {
  if (!preds || !labels || !acc || !uar || !weighted_f1) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] {
    m3s::ClassificationMetrics m =
        m3s::classification_metrics({preds, n}, {labels, n}, classes);
    *acc = m.accuracy;
    *uar = m.uar;
    *weighted_f1 = m.weighted_f1;
  });
}

m3s_status m3s_welch_t_test(const double* sample_a, size_t na,
                            const double* sample_b, size_t nb, double* t,
                            double* dof, double* p) {
  if (!sample_a || !sample_b || !p) {
    g_last_error = "null argument";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] {
    m3s::WelchResult r = m3s::welch_t_test({sample_a, na}, {sample_b, nb});
    if (t) *t = r.t;
    if (dof) *dof = r.dof;
    *p = r.p;
  });
}

m3s_status m3s_mask_span(double* features, size_t len, double rate,
                         uint64_t seed, size_t* start, size_t* span_len) {
  if (!features) {
    g_last_error = "null features";
    return M3S_ERR_RUNTIME;
  }
  return guarded([&] {
    m3s::Rng rng(seed);
    m3s::SpanMask span = m3s::plan_mask(len, rate, rng);
    m3s::apply_mask_row(features, len, span);
    if (start) *start = span.start;
    if (span_len) *span_len = span.length;
  });
}

}  // extern "C"
