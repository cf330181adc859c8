// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "m3s/error.hpp"

namespace m3s {

void MetricReport::set(const std::string& name, double value) {
  for (auto& entry : entries_) {
    if (entry.first == name) {
      entry.second = value;
      return;
    }
  }
  entries_.emplace_back(name, value);
}

double MetricReport::get(const std::string& name) const {
  for (const auto& entry : entries_) {
    if (entry.first == name) return entry.second;
  }
  raise(ErrorCode::config_invalid, "metric '" + name + "' not in report");
}

bool MetricReport::has(const std::string& name) const {
  for (const auto& entry : entries_) {
    if (entry.first == name) return true;
  }
  return false;
}

namespace {

void check_paired(std::span<const double> a, std::span<const double> b,
                  const char* op) {
  if (a.empty() || b.empty()) {
    raise(ErrorCode::empty_input, std::string(op) + " on empty input");
  }
  if (a.size() != b.size()) {
    raise(ErrorCode::length_mismatch,
          std::string(op) + ": " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + " values");
  }
}

double mean_of(std::span<const double> xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

}  // namespace

double mae(std::span<const double> preds, std::span<const double> labels) {
  check_paired(preds, labels, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += std::fabs(preds[i] - labels[i]);
  }
  return total / static_cast<double>(preds.size());
}

double pearson(std::span<const double> preds, std::span<const double> labels) {
  check_paired(preds, labels, "pearson");
  if (preds.size() < 2) {
    raise(ErrorCode::empty_input, "pearson needs at least 2 pairs");
  }
  double mx = mean_of(preds), my = mean_of(labels);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double dx = preds[i] - mx, dy = labels[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    raise(ErrorCode::constant_input,
          "pearson undefined for a constant sequence");
  }
  return sxy / std::sqrt(sxx * syy);
}

double acc2(std::span<const double> preds, std::span<const double> labels,
            double threshold) {
  check_paired(preds, labels, "acc2");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bool p = preds[i] >= threshold;
    bool y = labels[i] >= threshold;
    if (p == y) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

namespace {

int seven_bucket(double x) {
  double r = std::round(x);  // rounds half away from zero
  r = std::clamp(r, -3.0, 3.0);
  return static_cast<int>(r);
}

}  // namespace

double acc7(std::span<const double> preds, std::span<const double> labels) {
  check_paired(preds, labels, "acc7");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (seven_bucket(preds[i]) == seven_bucket(labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> actual,
                                             std::size_t classes) {
  if (predicted.empty() || actual.empty()) {
    raise(ErrorCode::empty_input, "classification_metrics on empty input");
  }
  if (predicted.size() != actual.size()) {
    raise(ErrorCode::length_mismatch,
          "classification_metrics: prediction/label counts differ");
  }
  auto check_label = [&](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= classes) {
      raise(ErrorCode::label_out_of_range,
            "class " + std::to_string(v) + " outside [0, " +
                std::to_string(classes) + ")");
    }
  };
  std::vector<std::size_t> confusion(classes * classes, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    check_label(predicted[i]);
    check_label(actual[i]);
    confusion[static_cast<std::size_t>(actual[i]) * classes +
              static_cast<std::size_t>(predicted[i])] += 1;
  }

  double n = static_cast<double>(predicted.size());
  ClassificationMetrics out;
  double correct = 0.0;
  for (std::size_t c = 0; c < classes; ++c) correct += confusion[c * classes + c];
  out.accuracy = correct / n;

  double recall_sum = 0.0;
  std::size_t present = 0;
  double weighted_f1 = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double tp = static_cast<double>(confusion[c * classes + c]);
    double support = 0.0, predicted_c = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      support += confusion[c * classes + j];
      predicted_c += confusion[j * classes + c];
    }
    if (support == 0.0) continue;  // absent classes do not enter Uar / F1
    ++present;
    double recall = tp / support;
    recall_sum += recall;
    double precision = predicted_c > 0.0 ? tp / predicted_c : 0.0;
    double f1 = (precision + recall) > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    weighted_f1 += support / n * f1;
  }
  out.uar = recall_sum / static_cast<double>(present);
  out.weighted_f1 = weighted_f1;
  return out;
}

double student_t_pdf(double x, double dof) {
  if (!(dof > 0.0)) {
    raise(ErrorCode::degenerate_sample, "t distribution needs dof > 0");
  }
  double log_coeff = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                     0.5 * std::log(dof * 3.141592653589793238462643383279502884);
  double log_kernel = -(dof + 1.0) / 2.0 * std::log1p(x * x / dof);
  return std::exp(log_coeff + log_kernel);
}

namespace {

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fb,
                        double fm, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, fm, flm, left, tol * 0.5, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, right, tol * 0.5, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fb, fm, whole, tol, 48);
}

}  // namespace

double student_t_tail(double t, double dof) {
  if (!(dof > 0.0)) {
    raise(ErrorCode::degenerate_sample, "t distribution needs dof > 0");
  }
  if (t < 0.0) return 1.0 - student_t_tail(-t, dof);
  // Map [t, inf) onto [0, 1) via x = t + u/(1-u); du-integrand stays finite.
  auto integrand = [t, dof](double u) {
    double one_minus = 1.0 - u;
    double x = t + u / one_minus;
    double pdf = student_t_pdf(x, dof);
    return pdf / (one_minus * one_minus);
  };
  const double upper = 1.0 - 1e-10;  // truncation error ~pdf tail, < 1e-9
  double tail = integrate(integrand, 0.0, upper, 5e-11);
  return std::clamp(tail, 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> sample_a,
                         std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    raise(ErrorCode::degenerate_sample,
          "welch_t_test needs at least 2 values per sample");
  }
  auto variance = [](std::span<const double> xs, double m) {
    double total = 0.0;
    for (double x : xs) total += (x - m) * (x - m);
    return total / static_cast<double>(xs.size() - 1);
  };
  double na = static_cast<double>(sample_a.size());
  double nb = static_cast<double>(sample_b.size());
  double ma = mean_of(sample_a), mb = mean_of(sample_b);
  double va = variance(sample_a, ma), vb = variance(sample_b, mb);
  if (va == 0.0 || vb == 0.0) {
    raise(ErrorCode::degenerate_sample,
          "welch_t_test needs nonzero variance in both samples");
  }
  double sa = va / na, sb = vb / nb;
  WelchResult result;
  result.t = (ma - mb) / std::sqrt(sa + sb);
  result.dof = (sa + sb) * (sa + sb) /
               (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  result.p = std::clamp(2.0 * student_t_tail(std::fabs(result.t), result.dof),
                        0.0, 1.0);
  return result;
}

namespace {

bool is_constant(std::span<const double> xs) {
  for (double x : xs) {
    if (x != xs[0]) return false;
  }
  return true;
}

}  // namespace

MetricReport regression_report(std::span<const double> preds,
                               std::span<const double> labels, bool with_acc7) {
  check_paired(preds, labels, "regression_report");
  MetricReport report;
  double mse = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double d = preds[i] - labels[i];
    mse += d * d;
  }
  report.set("MSE", mse / static_cast<double>(preds.size()));
  report.set("MAE", mae(preds, labels));
  if (preds.size() >= 2 && !is_constant(preds) && !is_constant(labels)) {
    report.set("Corr", pearson(preds, labels));
  }
  report.set("Acc-2", acc2(preds, labels));
  std::vector<int> pred_sign(preds.size()), label_sign(labels.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_sign[i] = preds[i] >= 0.0 ? 1 : 0;
    label_sign[i] = labels[i] >= 0.0 ? 1 : 0;
  }
  report.set("F1-Score",
             classification_metrics(pred_sign, label_sign, 2).weighted_f1);
  if (with_acc7) report.set("Acc-7", acc7(preds, labels));
  return report;
}

MetricReport classification_report(std::span<const int> preds,
                                   std::span<const int> labels,
                                   std::size_t classes) {
  ClassificationMetrics m = classification_metrics(preds, labels, classes);
  MetricReport report;
  report.set("Acc", m.accuracy);
  report.set("Uar", m.uar);
  report.set("F1-Score", m.weighted_f1);
  return report;
}

}  // namespace m3s
