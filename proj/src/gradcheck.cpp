// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/gradcheck.hpp"

#include <cmath>

namespace m3s {

namespace {

double evaluate(const ScalarGraphBuilder& f, std::span<const Tensor> params,
                std::vector<Graph::NodeId>* param_ids_out,
                Graph* graph_out) {
  Graph g;
  std::vector<Graph::NodeId> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(g.input(p));
  Graph::NodeId root = f(g, ids);
  double value = g.value(root)[0];
  if (param_ids_out) *param_ids_out = std::move(ids);
  if (graph_out) {
    g.backward(root);
    *graph_out = std::move(g);
  }
  return value;
}

}  // namespace

GradCheckReport grad_check(const ScalarGraphBuilder& f,
                           std::span<const Tensor> params, double h,
                           double tol) {
  if (!(h > 0.0) || h > 1e-2) {
    raise(ErrorCode::config_invalid, "grad_check step h must be in (0, 1e-2]");
  }
  GradCheckReport report;
  report.tol = tol;

  std::vector<Graph::NodeId> ids;
  Graph g;
  evaluate(f, params, &ids, &g);

  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Graph::NodeId id : ids) analytic.push_back(g.gradient(id));

  std::vector<Tensor> work(params.begin(), params.end());
  for (std::size_t p = 0; p < work.size(); ++p) {
    for (std::size_t i = 0; i < work[p].size(); ++i) {
      double saved = work[p][i];
      work[p][i] = saved + h;
      double up = evaluate(f, work, nullptr, nullptr);
      work[p][i] = saved - h;
      double down = evaluate(f, work, nullptr, nullptr);
      work[p][i] = saved;

      double numeric = (up - down) / (2.0 * h);
      double a = analytic[p][i];
      double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
      double rel = std::fabs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p;
        report.worst_coord = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  report.pass = report.max_rel_error <= tol;
  return report;
}

}  // namespace m3s
