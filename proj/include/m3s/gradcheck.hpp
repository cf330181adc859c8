// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "m3s/graph.hpp"

namespace m3s {

/// Builds a scalar-valued graph from parameter leaves that are already
/// inserted into `g`; returns the root node id.
using ScalarGraphBuilder =
    std::function<Graph::NodeId(Graph& g, std::span<const Graph::NodeId> params)>;

struct GradCheckReport {
  bool pass = false;
  double tol = 0.0;
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;  // index into the parameter set
  std::size_t worst_coord = 0;  // flat index within that parameter
  double analytic = 0.0;        // backward gradient at the worst coordinate
  double numeric = 0.0;         // central difference at the worst coordinate
};

/// Compares reverse-mode gradients of f against central finite differences
/// (f(p + h e_i) - f(p - h e_i)) / 2h over every coordinate of every
/// parameter. The reported relative error is |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(const ScalarGraphBuilder& f,
                           std::span<const Tensor> params, double h,
                           double tol);

}  // namespace m3s
