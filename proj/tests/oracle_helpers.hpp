// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Central finite difference of a scalar function of a flat coordinate
/// vector.
inline std::vector<double> central_differences(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> point, double h) {
  std::vector<double> grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    double saved = point[i];
    point[i] = saved + h;
    double up = f(point);
    point[i] = saved - h;
    double down = f(point);
    point[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Ridge-stabilized least squares via Gaussian elimination on the normal
/// equations: beta = (X^T X + ridge I)^-1 X^T y; X is row-major n x d.
inline std::vector<double> least_squares(const std::vector<double>& x,
                                         std::size_t n, std::size_t d,
                                         const std::vector<double>& y,
                                         double ridge = 1e-9) {
  std::vector<double> ata(d * d, 0.0), aty(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      aty[i] += x[r * d + i] * y[r];
      for (std::size_t j = 0; j < d; ++j) {
        ata[i * d + j] += x[r * d + i] * x[r * d + j];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) ata[i * d + i] += ridge;

  // Gaussian elimination with partial pivoting.
  std::vector<double> a = ata, b = aty;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::fabs(a[r * d + col]) > std::fabs(a[pivot * d + col])) pivot = r;
    }
    for (std::size_t j = 0; j < d; ++j) std::swap(a[col * d + j], a[pivot * d + j]);
    std::swap(b[col], b[pivot]);
    double diag = a[col * d + col];
    for (std::size_t r = col + 1; r < d; ++r) {
      double factor = a[r * d + col] / diag;
      for (std::size_t j = col; j < d; ++j) a[r * d + j] -= factor * a[col * d + j];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> beta(d, 0.0);
  for (std::size_t col = d; col-- > 0;) {
    double acc = b[col];
    for (std::size_t j = col + 1; j < d; ++j) acc -= a[col * d + j] * beta[j];
    beta[col] = acc / a[col * d + col];
  }
  return beta;
}

// Student-t CDF through the regularized incomplete beta function (continued
// fraction), a different route from the library's quadrature.
inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double incomplete_beta_cf(double x, double a, double b) {
  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= 400; ++m) {
    double m2 = 2.0 * m;
    double numer = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + numer * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    result *= d * c;
    numer = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + numer * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    result *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return result;
}

inline double regularized_incomplete_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - log_beta(b, a)) *
                   incomplete_beta_cf(1.0 - x, b, a) / b;
}

inline double student_t_cdf(double t, double dof) {
  double ib = regularized_incomplete_beta(dof / (t * t + dof), dof / 2.0, 0.5);
  return t >= 0.0 ? 1.0 - ib / 2.0 : ib / 2.0;
}

inline double welch_p_reference(const std::vector<double>& a,
                                const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  auto var = [&](const std::vector<double>& xs, double m) {
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
  };
  double ma = mean(a), mb = mean(b);
  double sa = var(a, ma) / static_cast<double>(a.size());
  double sb = var(b, mb) / static_cast<double>(b.size());
  double t = (ma - mb) / std::sqrt(sa + sb);
  double dof = (sa + sb) * (sa + sb) /
               (sa * sa / (a.size() - 1.0) + sb * sb / (b.size() - 1.0));
  return 2.0 * (1.0 - student_t_cdf(std::fabs(t), dof));
}

struct ConfusionReference {
  double accuracy = 0.0;
  double uar = 0.0;
  double weighted_f1 = 0.0;
};

/// Direct confusion-matrix arithmetic, written separately from the library.
inline ConfusionReference confusion_reference(const std::vector<int>& pred,
                                              const std::vector<int>& truth,
                                              int classes) {
  std::vector<std::vector<int>> m(classes, std::vector<int>(classes, 0));
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    m[truth[i]][pred[i]] += 1;
    if (truth[i] == pred[i]) ++correct;
  }
  ConfusionReference out;
  out.accuracy = double(correct) / double(pred.size());
  double recall_total = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    int support = 0, tp = m[c][c], predicted = 0;
    for (int j = 0; j < classes; ++j) {
      support += m[c][j];
      predicted += m[j][c];
    }
    if (support == 0) continue;
    ++present;
    double recall = double(tp) / double(support);
    recall_total += recall;
    double precision = predicted > 0 ? double(tp) / double(predicted) : 0.0;
    double f1 = precision + recall > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    out.weighted_f1 += double(support) / double(pred.size()) * f1;
  }
  out.uar = recall_total / double(present);
  return out;
}

}  // namespace oracle
