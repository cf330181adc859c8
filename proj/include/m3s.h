/* Copyright (c) 2026 The m3s authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the m3s shared library.
 *
 * Every function returns an m3s_status; on failure m3s_last_error() holds a
 * thread-local description of what went wrong. Strings returned through
 * char** out-parameters are heap-allocated and must be released with
 * m3s_string_free().
 */

#ifndef M3S_H
#define M3S_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum m3s_status {
  M3S_OK = 0,
  M3S_ERR_CONFIG = 1, /* invalid configuration */
  M3S_ERR_RUNTIME = 2 /* any other failure */
} m3s_status;

/* Opaque handle over a parsed experiment configuration. */
typedef struct m3s_config m3s_config;

unsigned m3s_abi_version(void);

/* Message of the most recent failing call on this thread ("" if none). */
const char* m3s_last_error(void);

void m3s_string_free(char* text);

/* ---- configuration ----------------------------------------------------- */

m3s_status m3s_config_open(const char* path, m3s_config** out);

/* Parses configuration from text instead of a file. */
m3s_status m3s_config_from_text(const char* text, m3s_config** out);

/* Overrides one key with a raw value (same syntax as the file, e.g.
 * "[0.4, 0.6]") and re-validates the whole configuration. */
m3s_status m3s_config_set(m3s_config* cfg, const char* key, const char* value);

void m3s_config_close(m3s_config* cfg);

/* ---- experiment commands ------------------------------------------------
 * out_dir: output directory; NULL or "" falls back to the config's run.out.
 * out_text: when non-NULL receives a printable summary (caller frees).
 */

m3s_status m3s_run_generate(const m3s_config* cfg, const char* out_dir,
                            char** out_text);

/* seed < 0 uses the first entry of run.seeds. */
m3s_status m3s_run_train(const m3s_config* cfg, const char* out_dir,
                         int64_t seed, char** out_text);

m3s_status m3s_run_compare(const m3s_config* cfg, const char* out_dir,
                           char** out_text);

m3s_status m3s_run_adapt(const m3s_config* cfg, const char* out_dir,
                         char** out_text);

/* level_bounds holds lo/hi pairs (2 * level_count doubles); level_count 0
 * falls back to sweep.levels from the config. */
m3s_status m3s_run_sweep(const m3s_config* cfg, const double* level_bounds,
                         size_t level_count, const char* out_dir,
                         char** out_text);

/* Recomputes Welch t-tests against ORIG from a report.json written by
 * compare/adapt. */
m3s_status m3s_run_significance(const char* report_path, char** out_text);

/* ---- evaluation helpers ------------------------------------------------- */

m3s_status m3s_metric_mae(const double* preds, const double* labels, size_t n,
                          double* out);
m3s_status m3s_metric_pearson(const double* preds, const double* labels,
                              size_t n, double* out);
m3s_status m3s_metric_acc2(const double* preds, const double* labels, size_t n,
                           double* out);
m3s_status m3s_metric_acc7(const double* preds, const double* labels, size_t n,
                           double* out);
m3s_status m3s_classification_metrics(const int* preds, const int* labels,
                                      size_t n, size_t classes, double* acc,
                                      double* uar, double* weighted_f1);
m3s_status m3s_welch_t_test(const double* sample_a, size_t na,
                            const double* sample_b, size_t nb, double* t,
                            double* dof, double* p);

/* Zeroes one contiguous span of length floor(len * rate) at a uniformly
 * drawn start, in place; reports the realized span. */
m3s_status m3s_mask_span(double* features, size_t len, double rate,
                         uint64_t seed, size_t* start, size_t* span_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* M3S_H */
