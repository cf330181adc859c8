// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/graph.hpp"

#include <cmath>
#include <string>

namespace m3s {

namespace {

bool leading_broadcast(const Shape& big, const Shape& small) {
  if (big.size() != small.size() + 1) return false;
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (big[i + 1] != small[i]) return false;
  }
  return true;
}

}  // namespace

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::input: return "input";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::relu: return "relu";
    case OpKind::tanh: return "tanh";
    case OpKind::concat: return "concat";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::square: return "square";
    case OpKind::log: return "log";
    case OpKind::softmax: return "softmax";
    case OpKind::log_softmax: return "log_softmax";
  }
  return "?";
}

const Tensor& Graph::value(NodeId id) const {
  if (id >= nodes_.size()) {
    raise(ErrorCode::shape_mismatch, "node id out of range");
  }
  return nodes_[id].value;
}

OpKind Graph::kind(NodeId id) const {
  if (id >= nodes_.size()) {
    raise(ErrorCode::shape_mismatch, "node id out of range");
  }
  return nodes_[id].kind;
}

const Tensor& Graph::operand(NodeId id) const {
  if (id >= nodes_.size()) {
    raise(ErrorCode::shape_mismatch, "operand node id out of range");
  }
  return nodes_[id].value;
}

Graph::NodeId Graph::emplace(OpKind kind, std::vector<NodeId> inputs,
                             Tensor value) {
  if (!value.all_finite()) {
    raise(ErrorCode::non_finite_input,
          std::string(op_kind_name(kind)) + " produced a non-finite value");
  }
  nodes_.push_back(Node{kind, std::move(inputs), std::move(value), 0.0});
  return nodes_.size() - 1;
}

Graph::NodeId Graph::input(Tensor value) {
  if (!value.all_finite()) {
    raise(ErrorCode::non_finite_input, "input tensor holds NaN/Inf");
  }
  return emplace(OpKind::input, {}, std::move(value));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& lhs = operand(a);
  const Tensor& rhs = operand(b);
  if (lhs.empty() || rhs.empty()) {
    raise(ErrorCode::empty_input, "matmul on empty tensor");
  }
  if (lhs.rank() != 2 || rhs.rank() != 2) {
    raise(ErrorCode::shape_mismatch,
          "matmul needs rank-2 operands, got " + shape_to_string(lhs.shape()) +
              " x " + shape_to_string(rhs.shape()));
  }
  std::size_t m = lhs.extent(0), k = lhs.extent(1);
  std::size_t k2 = rhs.extent(0), n = rhs.extent(1);
  if (k != k2) {
    raise(ErrorCode::shape_mismatch,
          "matmul inner extents differ: " + shape_to_string(lhs.shape()) +
              " x " + shape_to_string(rhs.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double lv = lhs[i * k + p];
      if (lv == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        out[i * n + j] += lv * rhs[p * n + j];
      }
    }
  }
  return emplace(OpKind::matmul, {a, b}, std::move(out));
}

namespace {

Tensor elementwise_binary(OpKind kind, const Tensor& lhs, const Tensor& rhs) {
  auto apply = [kind](double x, double y) {
    switch (kind) {
      case OpKind::add: return x + y;
      case OpKind::sub: return x - y;
      default: return x * y;
    }
  };
  if (lhs.same_shape(rhs)) {
    Tensor out = Tensor::zeros(lhs.shape());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      out[i] = apply(lhs[i], rhs[i]);
    }
    return out;
  }
  const bool rhs_small = leading_broadcast(lhs.shape(), rhs.shape());
  const bool lhs_small = leading_broadcast(rhs.shape(), lhs.shape());
  if (!rhs_small && !lhs_small) {
    raise(ErrorCode::shape_mismatch,
          std::string(op_kind_name(kind)) + " shapes " +
              shape_to_string(lhs.shape()) + " and " +
              shape_to_string(rhs.shape()) +
              " neither match nor differ by one leading batch axis");
  }
  const Tensor& big = rhs_small ? lhs : rhs;
  const Tensor& small = rhs_small ? rhs : lhs;
  std::size_t inner = small.size();
  std::size_t batch = big.size() / inner;
  Tensor out = Tensor::zeros(big.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < inner; ++i) {
      double x = rhs_small ? big[b * inner + i] : small[i];
      double y = rhs_small ? small[i] : big[b * inner + i];
      out[b * inner + i] = apply(x, y);
    }
  }
  return out;
}

}  // namespace

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& lhs = operand(a);
  const Tensor& rhs = operand(b);
  if (lhs.empty() || rhs.empty()) raise(ErrorCode::empty_input, "add on empty tensor");
  return emplace(OpKind::add, {a, b}, elementwise_binary(OpKind::add, lhs, rhs));
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& lhs = operand(a);
  const Tensor& rhs = operand(b);
  if (lhs.empty() || rhs.empty()) raise(ErrorCode::empty_input, "sub on empty tensor");
  return emplace(OpKind::sub, {a, b}, elementwise_binary(OpKind::sub, lhs, rhs));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& lhs = operand(a);
  const Tensor& rhs = operand(b);
  if (lhs.empty() || rhs.empty()) raise(ErrorCode::empty_input, "mul on empty tensor");
  return emplace(OpKind::mul, {a, b}, elementwise_binary(OpKind::mul, lhs, rhs));
}

Graph::NodeId Graph::scale(NodeId a, double factor) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "scale on empty tensor");
  if (!std::isfinite(factor)) {
    raise(ErrorCode::non_finite_input, "scale factor is not finite");
  }
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
  NodeId id = emplace(OpKind::scale, {a}, std::move(out));
  nodes_[id].scalar = factor;
  return id;
}

Graph::NodeId Graph::relu(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "relu on empty tensor");
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return emplace(OpKind::relu, {a}, std::move(out));
}

Graph::NodeId Graph::tanh(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "tanh on empty tensor");
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return emplace(OpKind::tanh, {a}, std::move(out));
}

Graph::NodeId Graph::concat(std::span<const NodeId> parts) {
  if (parts.empty()) raise(ErrorCode::empty_input, "concat of zero tensors");
  const Tensor& first = operand(parts[0]);
  if (first.empty()) raise(ErrorCode::empty_input, "concat on empty tensor");
  std::size_t rank = first.rank();
  if (rank != 1 && rank != 2) {
    raise(ErrorCode::shape_mismatch, "concat supports rank 1 or 2");
  }
  std::size_t rows = first.rows();
  std::size_t total_cols = 0;
  for (NodeId id : parts) {
    const Tensor& t = operand(id);
    if (t.empty()) raise(ErrorCode::empty_input, "concat on empty tensor");
    if (t.rank() != rank || t.rows() != rows) {
      raise(ErrorCode::shape_mismatch,
            "concat operands disagree on leading extents: " +
                shape_to_string(first.shape()) + " vs " +
                shape_to_string(t.shape()));
    }
    total_cols += t.cols();
  }
  Shape out_shape = rank == 1 ? Shape{total_cols} : Shape{rows, total_cols};
  Tensor out = Tensor::zeros(out_shape);
  std::size_t col_offset = 0;
  for (NodeId id : parts) {
    const Tensor& t = operand(id);
    std::size_t c = t.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < c; ++j) {
        out[r * total_cols + col_offset + j] = t[r * c + j];
      }
    }
    col_offset += c;
  }
  return emplace(OpKind::concat, std::vector<NodeId>(parts.begin(), parts.end()),
                 std::move(out));
}

Graph::NodeId Graph::sum(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "sum on empty tensor");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i];
  return emplace(OpKind::sum, {a}, Tensor::scalar(total));
}

Graph::NodeId Graph::mean(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "mean on empty tensor");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i];
  return emplace(OpKind::mean, {a},
                 Tensor::scalar(total / static_cast<double>(x.size())));
}

Graph::NodeId Graph::square(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "square on empty tensor");
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
  return emplace(OpKind::square, {a}, std::move(out));
}

Graph::NodeId Graph::log(NodeId a) {
  const Tensor& x = operand(a);
  if (x.empty()) raise(ErrorCode::empty_input, "log on empty tensor");
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::log(x[i]);
  return emplace(OpKind::log, {a}, std::move(out));
}

namespace {

void check_rowwise(const Tensor& x, const char* op) {
  if (x.empty()) raise(ErrorCode::empty_input, std::string(op) + " on empty tensor");
  if (x.rank() != 1 && x.rank() != 2) {
    raise(ErrorCode::shape_mismatch,
          std::string(op) + " supports rank 1 or 2, got " +
              shape_to_string(x.shape()));
  }
}

}  // namespace

Graph::NodeId Graph::softmax(NodeId a) {
  const Tensor& x = operand(a);
  check_rowwise(x, "softmax");
  std::size_t rows = x.rows(), cols = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = x[r * cols];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[r * cols + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      double e = std::exp(x[r * cols + j] - mx);
      out[r * cols + j] = e;
      denom += e;
    }
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] /= denom;
  }
  return emplace(OpKind::softmax, {a}, std::move(out));
}

Graph::NodeId Graph::log_softmax(NodeId a) {
  const Tensor& x = operand(a);
  check_rowwise(x, "log_softmax");
  std::size_t rows = x.rows(), cols = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = x[r * cols];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[r * cols + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      denom += std::exp(x[r * cols + j] - mx);
    }
    double log_denom = std::log(denom) + mx;
    for (std::size_t j = 0; j < cols; ++j) {
      out[r * cols + j] = x[r * cols + j] - log_denom;
    }
  }
  return emplace(OpKind::log_softmax, {a}, std::move(out));
}

void Graph::accumulate(NodeId id, const Tensor& delta) {
  Tensor& slot = adjoints_[id];
  if (slot.empty()) {
    slot = Tensor::zeros(nodes_[id].value.shape());
  }
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += delta[i];
}

void Graph::accumulate_binary(NodeId id, const Tensor& delta,
                              const Shape& out_shape, double sign) {
  const Tensor& own = nodes_[id].value;
  Tensor& slot = adjoints_[id];
  if (slot.empty()) slot = Tensor::zeros(own.shape());
  if (own.shape() == out_shape) {
    for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += sign * delta[i];
    return;
  }
  // Broadcast operand: fold the leading batch axis back down.
  std::size_t inner = own.size();
  std::size_t batch = delta.size() / inner;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < inner; ++i) {
      slot[i] += sign * delta[b * inner + i];
    }
  }
}

void Graph::backward(NodeId root) {
  if (root >= nodes_.size()) {
    raise(ErrorCode::shape_mismatch, "backward root out of range");
  }
  if (nodes_[root].value.size() != 1) {
    raise(ErrorCode::non_scalar_root,
          "backward root has shape " +
              shape_to_string(nodes_[root].value.shape()));
  }
  adjoints_.assign(nodes_.size(), Tensor());
  adjoints_[root] = Tensor::constant(nodes_[root].value.shape(), 1.0);
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (adjoints_[i].empty()) continue;
    backprop_node(i, adjoints_[i]);
  }
}

void Graph::backprop_node(NodeId id, const Tensor& grad) {
  const Node& node = nodes_[id];
  switch (node.kind) {
    case OpKind::input:
      return;
    case OpKind::matmul: {
      const Tensor& lhs = nodes_[node.inputs[0]].value;
      const Tensor& rhs = nodes_[node.inputs[1]].value;
      std::size_t m = lhs.extent(0), k = lhs.extent(1), n = rhs.extent(1);
      Tensor dl = Tensor::zeros(lhs.shape());
      Tensor dr = Tensor::zeros(rhs.shape());
      // dL = G * R^T, dR = L^T * G
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double g = grad[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) {
            dl[i * k + p] += g * rhs[p * n + j];
            dr[p * n + j] += g * lhs[i * k + p];
          }
        }
      }
      accumulate(node.inputs[0], dl);
      accumulate(node.inputs[1], dr);
      return;
    }
    case OpKind::add: {
      accumulate_binary(node.inputs[0], grad, node.value.shape(), 1.0);
      accumulate_binary(node.inputs[1], grad, node.value.shape(), 1.0);
      return;
    }
    case OpKind::sub: {
      accumulate_binary(node.inputs[0], grad, node.value.shape(), 1.0);
      accumulate_binary(node.inputs[1], grad, node.value.shape(), -1.0);
      return;
    }
    case OpKind::mul: {
      const Tensor& lhs = nodes_[node.inputs[0]].value;
      const Tensor& rhs = nodes_[node.inputs[1]].value;
      Tensor dl = elementwise_binary(OpKind::mul, grad, rhs);
      Tensor dr = elementwise_binary(OpKind::mul, grad, lhs);
      accumulate_binary(node.inputs[0], dl, node.value.shape(), 1.0);
      accumulate_binary(node.inputs[1], dr, node.value.shape(), 1.0);
      return;
    }
    case OpKind::scale: {
      Tensor d = Tensor::zeros(node.value.shape());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = node.scalar * grad[i];
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::relu: {
      const Tensor& x = nodes_[node.inputs[0]].value;
      Tensor d = Tensor::zeros(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) {
        d[i] = x[i] > 0.0 ? grad[i] : 0.0;
      }
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::tanh: {
      const Tensor& y = node.value;
      Tensor d = Tensor::zeros(y.shape());
      for (std::size_t i = 0; i < y.size(); ++i) {
        d[i] = (1.0 - y[i] * y[i]) * grad[i];
      }
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::concat: {
      std::size_t total_cols = node.value.cols();
      std::size_t rows = node.value.rows();
      std::size_t col_offset = 0;
      for (NodeId part : node.inputs) {
        const Tensor& t = nodes_[part].value;
        std::size_t c = t.cols();
        Tensor d = Tensor::zeros(t.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < c; ++j) {
            d[r * c + j] = grad[r * total_cols + col_offset + j];
          }
        }
        accumulate(part, d);
        col_offset += c;
      }
      return;
    }
    case OpKind::sum: {
      const Tensor& x = nodes_[node.inputs[0]].value;
      accumulate(node.inputs[0], Tensor::constant(x.shape(), grad[0]));
      return;
    }
    case OpKind::mean: {
      const Tensor& x = nodes_[node.inputs[0]].value;
      double g = grad[0] / static_cast<double>(x.size());
      accumulate(node.inputs[0], Tensor::constant(x.shape(), g));
      return;
    }
    case OpKind::square: {
      const Tensor& x = nodes_[node.inputs[0]].value;
      Tensor d = Tensor::zeros(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = 2.0 * x[i] * grad[i];
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::log: {
      const Tensor& x = nodes_[node.inputs[0]].value;
      Tensor d = Tensor::zeros(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = grad[i] / x[i];
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::softmax: {
      const Tensor& y = node.value;
      std::size_t rows = y.rows(), cols = y.cols();
      Tensor d = Tensor::zeros(y.shape());
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          dot += grad[r * cols + j] * y[r * cols + j];
        }
        for (std::size_t j = 0; j < cols; ++j) {
          d[r * cols + j] = y[r * cols + j] * (grad[r * cols + j] - dot);
        }
      }
      accumulate(node.inputs[0], d);
      return;
    }
    case OpKind::log_softmax: {
      const Tensor& y = node.value;  // y = x - logsumexp(x)
      std::size_t rows = y.rows(), cols = y.cols();
      Tensor d = Tensor::zeros(y.shape());
      for (std::size_t r = 0; r < rows; ++r) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) gsum += grad[r * cols + j];
        for (std::size_t j = 0; j < cols; ++j) {
          d[r * cols + j] =
              grad[r * cols + j] - std::exp(y[r * cols + j]) * gsum;
        }
      }
      accumulate(node.inputs[0], d);
      return;
    }
  }
}

Tensor Graph::gradient(NodeId id) const {
  if (id >= nodes_.size()) {
    raise(ErrorCode::shape_mismatch, "gradient node id out of range");
  }
  if (id >= adjoints_.size() || adjoints_[id].empty()) {
    return Tensor::zeros(nodes_[id].value.shape());
  }
  return adjoints_[id];
}

}  // namespace m3s
