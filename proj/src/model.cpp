// Copyright (c) 2026 The m3s authors
// SPDX-License-Identifier: Apache-2.0

#include "m3s/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "m3s/fsio.hpp"
#include "m3s/rng.hpp"

namespace m3s {

void ModelConfig::validate() const {
  for (std::size_t d : input_dims) {
    if (d < 1) {
      raise(ErrorCode::config_invalid, "modality input dims must be >= 1");
    }
  }
  if (head == HeadKind::classification && classes < 2) {
    raise(ErrorCode::config_invalid, "classification needs at least 2 classes");
  }
  for (const auto& sizes : encoder_hidden) {
    for (std::size_t s : sizes) {
      if (s < 1) raise(ErrorCode::config_invalid, "hidden sizes must be >= 1");
    }
  }
  for (std::size_t s : fusion_hidden) {
    if (s < 1) raise(ErrorCode::config_invalid, "hidden sizes must be >= 1");
  }
}

void Parameters::push(std::string name, Tensor value) {
  items_.push_back(NamedTensor{std::move(name), std::move(value)});
}

std::size_t Parameters::coordinate_count() const {
  std::size_t n = 0;
  for (const NamedTensor& item : items_) n += item.value.size();
  return n;
}

bool Parameters::same_layout(const Parameters& other) const {
  if (items_.size() != other.items_.size()) return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].name != other.items_[i].name) return false;
    if (items_[i].value.shape() != other.items_[i].value.shape()) return false;
  }
  return true;
}

bool Parameters::equals(const Parameters& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!items_[i].value.equals(other.items_[i].value)) return false;
  }
  return true;
}

namespace {

struct LayerSpec {
  std::string name;
  std::size_t fan_in;
  std::size_t fan_out;
};

/// Fixed enumeration order: audio stack, video stack, language stack, fusion
/// stack, head. Each layer contributes "<name>.weight" then "<name>.bias".
std::vector<LayerSpec> enumerate_layers(const ModelConfig& cfg) {
  std::vector<LayerSpec> layers;
  std::size_t fused_dim = 0;
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    std::size_t width = cfg.input_dims[m];
    const auto& hidden = cfg.encoder_hidden[m];
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      std::string base = std::string(modality_name(static_cast<Modality>(m))) +
                         ".l" + std::to_string(i);
      layers.push_back(LayerSpec{base, width, hidden[i]});
      width = hidden[i];
    }
    fused_dim += width;
  }
  std::size_t width = fused_dim;
  for (std::size_t i = 0; i < cfg.fusion_hidden.size(); ++i) {
    layers.push_back(
        LayerSpec{"fusion.l" + std::to_string(i), width, cfg.fusion_hidden[i]});
    width = cfg.fusion_hidden[i];
  }
  layers.push_back(LayerSpec{"head", width, cfg.output_dim()});
  return layers;
}

}  // namespace

Parameters init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Parameters params;
  for (const LayerSpec& layer : enumerate_layers(config)) {
    double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    Tensor weight = Tensor::zeros({layer.fan_in, layer.fan_out});
    for (std::size_t i = 0; i < weight.size(); ++i) {
      weight[i] = rng.uniform(-bound, bound);
    }
    params.push(layer.name + ".weight", std::move(weight));
    params.push(layer.name + ".bias", Tensor::zeros({layer.fan_out}));
  }
  return params;
}

namespace {

Graph::NodeId apply_activation(Graph& g, Graph::NodeId x, Activation act) {
  return act == Activation::relu ? g.relu(x) : g.tanh(x);
}

}  // namespace

BoundModel bind_model(Graph& g, const ModelConfig& config,
                      const Parameters& params, const Batch& batch) {
  config.validate();
  if (batch.size() < 1) {
    raise(ErrorCode::empty_input, "batch must hold at least one sample");
  }
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    const Tensor& feats = batch.modality(static_cast<Modality>(m));
    if (feats.rank() != 2 || feats.extent(1) != config.input_dims[m]) {
      raise(ErrorCode::shape_mismatch,
            std::string(modality_name(static_cast<Modality>(m))) +
                " features " + shape_to_string(feats.shape()) +
                " do not match configured dim " +
                std::to_string(config.input_dims[m]));
    }
  }

  BoundModel bound;
  bound.param_nodes.reserve(params.size());
  std::size_t next = 0;
  auto take_layer = [&](Graph::NodeId x, bool linear_only) {
    if (next + 2 > params.size()) {
      raise(ErrorCode::shape_mismatch, "parameter list too short for config");
    }
    Graph::NodeId w = g.input(params.tensor(next));
    Graph::NodeId b = g.input(params.tensor(next + 1));
    bound.param_nodes.push_back(w);
    bound.param_nodes.push_back(b);
    next += 2;
    Graph::NodeId z = g.add(g.matmul(x, w), b);
    return linear_only ? z : apply_activation(g, z, config.activation);
  };

  std::array<Graph::NodeId, kNumModalities> encoded{};
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    Graph::NodeId x = g.input(batch.modality(static_cast<Modality>(m)));
    for (std::size_t i = 0; i < config.encoder_hidden[m].size(); ++i) {
      x = take_layer(x, false);
    }
    encoded[m] = x;
  }
  Graph::NodeId fused = g.concat(encoded);
  for (std::size_t i = 0; i < config.fusion_hidden.size(); ++i) {
    fused = take_layer(fused, false);
  }
  bound.output = take_layer(fused, true);
  if (next != params.size()) {
    raise(ErrorCode::shape_mismatch,
          "parameter list does not match the model configuration");
  }
  return bound;
}

Graph::NodeId attach_loss(Graph& g, const ModelConfig& config,
                          Graph::NodeId output, std::span<const double> labels) {
  const Tensor& out = g.value(output);
  if (labels.size() != out.rows()) {
    raise(ErrorCode::length_mismatch,
          "got " + std::to_string(labels.size()) + " labels for " +
              std::to_string(out.rows()) + " predictions");
  }
  if (config.head == HeadKind::regression) {
    Tensor target({labels.size(), 1},
                  std::vector<double>(labels.begin(), labels.end()));
    Graph::NodeId diff = g.sub(output, g.input(std::move(target)));
    return g.mean(g.square(diff));
  }
  std::size_t classes = config.classes;
  Tensor onehot = Tensor::zeros({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double raw = labels[i];
    double rounded = std::nearbyint(raw);
    if (raw != rounded || rounded < 0.0 ||
        rounded >= static_cast<double>(classes)) {
      raise(ErrorCode::label_out_of_range,
            "class label " + format_double(raw) + " outside [0, " +
                std::to_string(classes) + ")");
    }
    onehot.at(i, static_cast<std::size_t>(rounded)) = 1.0;
  }
  Graph::NodeId picked = g.mul(g.log_softmax(output), g.input(std::move(onehot)));
  return g.scale(g.sum(picked), -1.0 / static_cast<double>(labels.size()));
}

LossAndGrads loss_and_grads(const ModelConfig& config, const Parameters& params,
                            const Batch& batch) {
  Graph g;
  BoundModel bound = bind_model(g, config, params, batch);
  Graph::NodeId loss = attach_loss(g, config, bound.output, batch.labels);
  g.backward(loss);
  LossAndGrads result;
  result.loss = g.value(loss)[0];
  result.grads.reserve(bound.param_nodes.size());
  for (Graph::NodeId id : bound.param_nodes) {
    result.grads.push_back(g.gradient(id));
  }
  return result;
}

double loss_value(const ModelConfig& config, const Parameters& params,
                  const Batch& batch) {
  Graph g;
  BoundModel bound = bind_model(g, config, params, batch);
  Graph::NodeId loss = attach_loss(g, config, bound.output, batch.labels);
  return g.value(loss)[0];
}

Tensor forward(const ModelConfig& config, const Parameters& params,
               const Batch& batch) {
  Graph g;
  BoundModel bound = bind_model(g, config, params, batch);
  return g.value(bound.output);
}

std::vector<double> predict_values(const ModelConfig& config,
                                   const Parameters& params,
                                   const Batch& batch) {
  Tensor out = forward(config, params, batch);
  std::vector<double> values(out.rows());
  std::size_t cols = out.cols();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = out[i * cols];
  return values;
}

std::vector<int> predict_classes(const ModelConfig& config,
                                 const Parameters& params, const Batch& batch) {
  Tensor out = forward(config, params, batch);
  std::size_t cols = out.cols();
  std::vector<int> classes(out.rows());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < cols; ++j) {
      if (out[i * cols + j] > out[i * cols + best]) best = j;
    }
    classes[i] = static_cast<int>(best);
  }
  return classes;
}

void save_checkpoint(const Parameters& params, const std::string& path) {
  std::ostringstream out;
  out << "m3s-params 1\n" << params.size() << "\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params.tensor(i);
    out << "tensor " << params.name(i) << " " << t.rank();
    for (std::size_t d : t.shape()) out << " " << d;
    out << "\n";
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j > 0) out << " ";
      out << format_double(t[j]);
    }
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

Parameters load_checkpoint(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "m3s-params" || version != 1) {
    raise(ErrorCode::parse_error, path + " is not an m3s checkpoint");
  }
  std::size_t count = 0;
  in >> count;
  Parameters params;
  for (std::size_t i = 0; i < count; ++i) {
    std::string tag, name;
    std::size_t rank = 0;
    in >> tag >> name >> rank;
    if (!in || tag != "tensor") {
      raise(ErrorCode::parse_error, "malformed tensor record in " + path);
    }
    Shape shape(rank);
    for (std::size_t d = 0; d < rank; ++d) in >> shape[d];
    std::size_t n = shape_size(shape);
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) in >> values[j];
    if (!in) {
      raise(ErrorCode::parse_error, "truncated tensor payload in " + path);
    }
    params.push(name, Tensor(std::move(shape), std::move(values)));
  }
  return params;
}

}  // namespace m3s
