// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "m3s/tensor.hpp"

namespace m3s {

enum class OpKind {
  input,
  matmul,
  add,
  sub,
  mul,
  scale,
  relu,
  tanh,
  concat,
  sum,
  mean,
  square,
  log,
  softmax,
  log_softmax,
};

const char* op_kind_name(OpKind kind);

/// Define-by-run reverse-mode differentiation graph.
///
/// Nodes are appended as operations execute; the append order is the
/// topological order and backward() walks it in exact reverse. A graph is
/// built for one forward pass and discarded, which keeps the nested training
/// loops simple: there is never stale state to invalidate.
///
/// Every forward operation validates shapes and checks its output for
/// NaN/Inf, so a non-finite value surfaces as an error at the op that
/// produced it instead of propagating silently.
///
/// Elementwise binary ops accept identical shapes or a broadcast of the
/// smaller operand over a single leading batch axis ([B, N] op [N]); no other
/// broadcasting exists.
class Graph {
 public:
  using NodeId = std::size_t;

  /// Inserts a leaf holding `value`. Rejects non-finite payloads.
  NodeId input(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  /// Concatenation along the last axis; leading extents must agree.
  NodeId concat(std::span<const NodeId> parts);
  /// Full reduction to a scalar of shape [1].
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  NodeId square(NodeId a);
  NodeId log(NodeId a);
  /// Row-wise softmax over the last axis, max-subtracted for stability.
  NodeId softmax(NodeId a);
  /// Row-wise log(softmax(x)) computed in one stable step.
  NodeId log_softmax(NodeId a);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  const Tensor& value(NodeId id) const;
  OpKind kind(NodeId id) const;

  /// Reverse-mode sweep from a scalar root. Adjoints are recomputed from
  /// scratch on every call; repeated calls are bitwise identical.
  void backward(NodeId root);

  /// Adjoint of `id` after backward(); zeros if the node does not reach the
  /// root.
  Tensor gradient(NodeId id) const;

 private:
  struct Node {
    OpKind kind;
    std::vector<NodeId> inputs;
    Tensor value;
    double scalar = 0.0;  // factor for scale
  };

  NodeId emplace(OpKind kind, std::vector<NodeId> inputs, Tensor value);
  const Tensor& operand(NodeId id) const;
  void accumulate(NodeId id, const Tensor& delta);
  /// Adds `delta` into the adjoint of an operand of an elementwise binary
  /// op, reducing over the leading axis when the operand was broadcast.
  void accumulate_binary(NodeId id, const Tensor& delta, const Shape& out_shape,
                         double sign);
  void backprop_node(NodeId id, const Tensor& grad);

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;
};

}  // namespace m3s
