// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "m3s/batch.hpp"
#include "m3s/graph.hpp"

namespace m3s {

enum class Activation { relu, tanh };
enum class HeadKind { regression, classification };

/// Late-fusion predictor: one feed-forward encoder per modality, the encoder
/// outputs concatenated and passed through a fusion stack into a linear head.
struct ModelConfig {
  std::array<std::size_t, kNumModalities> input_dims{1, 1, 1};
  std::array<std::vector<std::size_t>, kNumModalities> encoder_hidden;
  std::vector<std::size_t> fusion_hidden;
  HeadKind head = HeadKind::regression;
  std::size_t classes = 2;  // classification only
  Activation activation = Activation::tanh;

  std::size_t output_dim() const {
    return head == HeadKind::regression ? 1 : classes;
  }
  void validate() const;
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Ordered collection of named parameter tensors. Enumeration order is fixed
/// at construction, so elementwise arithmetic between two Parameters from the
/// same config is well defined. Plain value semantics: a copy is a deep,
/// independent snapshot.
class Parameters {
 public:
  void push(std::string name, Tensor value);

  std::size_t size() const noexcept { return items_.size(); }
  const NamedTensor& operator[](std::size_t i) const { return items_[i]; }
  Tensor& tensor(std::size_t i) { return items_[i].value; }
  const Tensor& tensor(std::size_t i) const { return items_[i].value; }
  const std::string& name(std::size_t i) const { return items_[i].name; }

  /// Total number of scalar coordinates.
  std::size_t coordinate_count() const;
  bool same_layout(const Parameters& other) const;
  bool equals(const Parameters& other) const;

 private:
  std::vector<NamedTensor> items_;
};

/// Glorot-style uniform init: weights in [-s, s] with s = sqrt(6/(fan_in +
/// fan_out)), biases zero. Identical seed gives bitwise-identical parameters.
Parameters init_params(const ModelConfig& config, std::uint64_t seed);

struct BoundModel {
  Graph::NodeId output;                      // [B, 1] or [B, C]
  std::vector<Graph::NodeId> param_nodes;    // aligned with Parameters order
};

/// Records the full forward pass for one batch into `g`.
BoundModel bind_model(Graph& g, const ModelConfig& config,
                      const Parameters& params, const Batch& batch);

/// MSE for regression heads, softmax cross-entropy for classification heads.
/// Returns a scalar node.
Graph::NodeId attach_loss(Graph& g, const ModelConfig& config,
                          Graph::NodeId output,
                          std::span<const double> labels);

struct LossAndGrads {
  double loss = 0.0;
  std::vector<Tensor> grads;  // aligned with Parameters order
};

LossAndGrads loss_and_grads(const ModelConfig& config, const Parameters& params,
                            const Batch& batch);
double loss_value(const ModelConfig& config, const Parameters& params,
                  const Batch& batch);

/// Raw head outputs, [B, 1] or [B, C].
Tensor forward(const ModelConfig& config, const Parameters& params,
               const Batch& batch);
/// Regression: predicted value per sample. Classification: argmax class.
std::vector<double> predict_values(const ModelConfig& config,
                                   const Parameters& params, const Batch& batch);
std::vector<int> predict_classes(const ModelConfig& config,
                                 const Parameters& params, const Batch& batch);

/// Checkpoint io; the textual format is documented in the README and
/// round-trips doubles exactly.
void save_checkpoint(const Parameters& params, const std::string& path);
Parameters load_checkpoint(const std::string& path);

}  // namespace m3s
