// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

namespace m3s {

/// Named metric values in a fixed emission order (the paper-style column
/// order). Only the metrics applicable to a task are present.
class MetricReport {
 public:
  void set(const std::string& name, double value);
  double get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, double>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

double mae(std::span<const double> preds, std::span<const double> labels);

/// Sample Pearson correlation; constant input is an error, not zero.
double pearson(std::span<const double> preds, std::span<const double> labels);

/// Binary agreement after thresholding both sides at `threshold`
/// (>= threshold counts as positive).
double acc2(std::span<const double> preds, std::span<const double> labels,
            double threshold = 0.0);

/// Seven-interval accuracy: both sides mapped to
/// clamp(round-half-away-from-zero(x), -3, 3) and compared.
double acc7(std::span<const double> preds, std::span<const double> labels);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double uar = 0.0;          // mean recall over classes present in the labels
  double weighted_f1 = 0.0;  // support-weighted mean of per-class F1
};

ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> actual,
                                             std::size_t classes);

/// Density of Student's t with `dof` degrees of freedom.
double student_t_pdf(double x, double dof);

/// Upper tail P(T > t) computed by adaptive quadrature (absolute error
/// below 1e-9).
double student_t_tail(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 0.0;  // two-tailed
};

/// Welch's unequal-variance two-sample t-test. Each sample needs size >= 2
/// and nonzero variance.
WelchResult welch_t_test(std::span<const double> sample_a,
                         std::span<const double> sample_b);

/// Per-task reports. Regression always carries MSE, MAE, Corr, Acc-2 and
/// F1-Score; Acc-7 is added when `with_acc7` (MOSI-style [-3, 3] labels).
/// Corr is omitted when either side is constant.
MetricReport regression_report(std::span<const double> preds,
                               std::span<const double> labels, bool with_acc7);
MetricReport classification_report(std::span<const int> preds,
                                   std::span<const int> labels,
                                   std::size_t classes);

}  // namespace m3s
