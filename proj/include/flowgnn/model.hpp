/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#ifndef FLOWGNN_MODEL_HPP
#define FLOWGNN_MODEL_HPP

#include "flowgnn/graph.hpp"
#include "flowgnn/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace flowgnn {

enum class ModelKind { GCN, GIN, GAT, PNA, DGN };

inline std::string to_string(ModelKind k) {
  switch (k) {
  case ModelKind::GCN: return "gcn";
  case ModelKind::GIN: return "gin";
  case ModelKind::GAT: return "gat";
  case ModelKind::PNA: return "pna";
  case ModelKind::DGN: return "dgn";
  }
  return "?";
}

struct ModelConfig {
  ModelKind kind = ModelKind::GCN;
  bool virtual_node = false; ///< GIN only ("GIN-VN")
  std::size_t num_layers = 5;
  std::size_t input_dim = 9;
  std::size_t hidden_dim = 100; ///< for GAT: gat_heads * gat_head_dim
  std::size_t edge_dim = 0;     ///< edge feature width consumed by GIN/PNA encoders
  std::size_t gat_heads = 4;
  std::size_t gat_head_dim = 16;
  Scalar gat_leaky_slope = 0.2f;
  Scalar pna_avg_log_degree = 1.0f; ///< D~, supplied from training statistics
  std::vector<Scalar> gin_epsilon;  ///< one per layer; empty means all zero
  std::vector<std::size_t> head_dims{1};

  std::size_t layer_in_dim(std::size_t l) const { return l == 0 ? input_dim : hidden_dim; }
  std::size_t output_dim() const { return num_layers == 0 ? input_dim : hidden_dim; }
  bool uses_edge_features() const { return kind == ModelKind::GIN || kind == ModelKind::PNA; }
  std::string name() const { return to_string(kind) + (virtual_node ? "-vn" : ""); }

  void validate() const {
    if (input_dim == 0 || hidden_dim == 0)
      throw ConfigError("model dims must be positive");
    if (virtual_node && kind != ModelKind::GIN)
      throw ConfigError("virtual node is supported with GIN only");
    if (kind == ModelKind::GAT && gat_heads * gat_head_dim != hidden_dim)
      throw ConfigError("GAT: heads * head_dim (" + std::to_string(gat_heads * gat_head_dim) +
                        ") != hidden_dim (" + std::to_string(hidden_dim) + ")");
    if (kind == ModelKind::PNA && !(pna_avg_log_degree > 0))
      throw ConfigError("PNA: average log degree must be > 0");
    if (!gin_epsilon.empty() && gin_epsilon.size() != num_layers)
      throw ConfigError("GIN: need one epsilon per layer");
    for (std::size_t d : head_dims)
      if (d == 0)
        throw ConfigError("head dims must be positive");
  }
};

/// Model presets matching the evaluated configurations: GCN/GIN/GIN-VN with
/// 5 layers of width 100, PNA with 4 layers of width 80 and a (40, 20, 1)
/// head, DGN with 4 layers of width 100 and a (50, 25, 1) head, GAT with 5
/// layers of 4 heads x 16 features.
inline ModelConfig preset(const std::string &name, std::size_t input_dim, std::size_t edge_dim) {
  ModelConfig c;
  c.input_dim = input_dim;
  if (name == "gcn" || name == "gin" || name == "gin-vn") {
    c.kind = name == "gcn" ? ModelKind::GCN : ModelKind::GIN;
    c.virtual_node = name == "gin-vn";
    c.num_layers = 5;
    c.hidden_dim = 100;
  } else if (name == "pna") {
    c.kind = ModelKind::PNA;
    c.num_layers = 4;
    c.hidden_dim = 80;
    c.head_dims = {40, 20, 1};
  } else if (name == "dgn") {
    c.kind = ModelKind::DGN;
    c.num_layers = 4;
    c.hidden_dim = 100;
    c.head_dims = {50, 25, 1};
  } else if (name == "gat") {
    c.kind = ModelKind::GAT;
    c.num_layers = 5;
    c.gat_heads = 4;
    c.gat_head_dim = 16;
    c.hidden_dim = 64;
  } else {
    throw ConfigError("unknown model '" + name + "' (expected gcn, gin, gin-vn, gat, pna, dgn)");
  }
  if (c.uses_edge_features())
    c.edge_dim = edge_dim;
  return c;
}

/// y = W x + b with W stored as out x in.
struct Linear {
  Matrix weight;
  std::vector<Scalar> bias; ///< empty when the layer has no bias

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  bool empty() const { return weight.empty(); }

  /// Input-stationary evaluation: each input element updates the whole
  /// output vector before the next element is read.
  void apply(std::span<const Scalar> x, std::span<Scalar> y) const {
    for (std::size_t o = 0; o < y.size(); ++o)
      y[o] = bias.empty() ? 0.0f : bias[o];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Scalar xi = x[i];
      for (std::size_t o = 0; o < y.size(); ++o)
        y[o] += weight(o, i) * xi;
    }
  }

  friend bool operator==(const Linear &, const Linear &) = default;
};

struct LayerParams {
  Linear linear;       ///< GCN/GAT transform, PNA/DGN node update
  Linear mlp0, mlp1;   ///< GIN node MLP
  Linear edge_encoder; ///< GIN/PNA, D -> message width; empty when D = 0
  Matrix att_target;   ///< GAT, heads x head_dim, applied to the updated node
  Matrix att_neighbor; ///< GAT, heads x head_dim, applied to each neighbor
  Scalar epsilon = 0.0f;
  Linear vn_mlp0, vn_mlp1; ///< GIN-VN virtual-node update (absent on the last layer)

  friend bool operator==(const LayerParams &, const LayerParams &) = default;
};

struct Model {
  ModelConfig config;
  std::vector<LayerParams> layers;
  std::vector<Linear> head;

  /// Checks every tensor shape against the config.
  void validate() const {
    config.validate();
    auto expect = [](const Linear &lin, std::size_t out, std::size_t in, bool bias, const std::string &what) {
      if (lin.out_dim() != out || lin.in_dim() != in)
        throw ConfigError(what + ": expected " + std::to_string(out) + "x" + std::to_string(in) + ", got " +
                          std::to_string(lin.out_dim()) + "x" + std::to_string(lin.in_dim()));
      if (bias ? lin.bias.size() != out : !lin.bias.empty())
        throw ConfigError(what + ": bias length mismatch");
    };
    const auto &c = config;
    if (layers.size() != c.num_layers)
      throw ConfigError("expected " + std::to_string(c.num_layers) + " layers, got " + std::to_string(layers.size()));
    for (std::size_t l = 0; l < c.num_layers; ++l) {
      const auto &p = layers[l];
      const std::size_t in = c.layer_in_dim(l), f = c.hidden_dim;
      const std::string tag = "layer" + std::to_string(l);
      switch (c.kind) {
      case ModelKind::GCN: expect(p.linear, f, in, false, tag + ".weight"); break;
      case ModelKind::GAT:
        expect(p.linear, f, in, false, tag + ".weight");
        if (p.att_target.rows() != c.gat_heads || p.att_target.cols() != c.gat_head_dim ||
            p.att_neighbor.rows() != c.gat_heads || p.att_neighbor.cols() != c.gat_head_dim)
          throw ConfigError(tag + ": attention vectors must be heads x head_dim");
        break;
      case ModelKind::GIN:
        expect(p.mlp0, f, in, true, tag + ".mlp0");
        expect(p.mlp1, f, f, true, tag + ".mlp1");
        break;
      case ModelKind::PNA: expect(p.linear, f, 12 * in, true, tag + ".weight"); break;
      case ModelKind::DGN: expect(p.linear, f, 2 * in, true, tag + ".weight"); break;
      }
      if (c.uses_edge_features()) {
        if (c.edge_dim > 0)
          expect(p.edge_encoder, in, c.edge_dim, true, tag + ".edge_enc");
        else if (!p.edge_encoder.empty())
          throw ConfigError(tag + ": edge encoder present but edge_dim is 0");
      }
      if (c.virtual_node && l + 1 < c.num_layers) {
        expect(p.vn_mlp0, f, in, true, tag + ".vn_mlp0");
        expect(p.vn_mlp1, f, f, true, tag + ".vn_mlp1");
      }
    }
    std::size_t prev = c.output_dim();
    if (head.size() != c.head_dims.size())
      throw ConfigError("head layer count mismatch");
    for (std::size_t k = 0; k < head.size(); ++k) {
      expect(head[k], c.head_dims[k], prev, true, "head" + std::to_string(k));
      prev = c.head_dims[k];
    }
  }
};

namespace detail {

inline Linear random_linear(std::size_t out, std::size_t in, bool bias, Rng &rng, float gain = 1.0f) {
  Linear lin;
  lin.weight = Matrix(out, in);
  const float bound = gain / std::sqrt(static_cast<float>(in));
  for (auto &w : lin.weight.data())
    w = rng.uniform(-bound, bound);
  if (bias) {
    lin.bias.resize(out);
    for (auto &b : lin.bias)
      b = rng.uniform(-bound, bound);
  }
  return lin;
}

} // namespace detail

/// Random parameters scaled by 1/sqrt(fan_in) so activations stay O(1) over
/// several layers. The virtual-node MLP reads an unnormalised sum over the
/// whole graph, so its input layer is scaled by a further 1/sqrt(fan_in).
/// Deterministic for a fixed seed.
inline Model random_model(const ModelConfig &config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Model m;
  m.config = config;
  const std::size_t f = config.hidden_dim;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t in = config.layer_in_dim(l);
    LayerParams p;
    switch (config.kind) {
    case ModelKind::GCN: p.linear = detail::random_linear(f, in, false, rng); break;
    case ModelKind::GAT: {
      p.linear = detail::random_linear(f, in, false, rng);
      const float bound = 1.0f / std::sqrt(static_cast<float>(config.gat_head_dim));
      p.att_target = Matrix(config.gat_heads, config.gat_head_dim);
      p.att_neighbor = Matrix(config.gat_heads, config.gat_head_dim);
      for (auto &v : p.att_target.data())
        v = rng.uniform(-bound, bound);
      for (auto &v : p.att_neighbor.data())
        v = rng.uniform(-bound, bound);
      break;
    }
    case ModelKind::GIN:
      p.mlp0 = detail::random_linear(f, in, true, rng);
      p.mlp1 = detail::random_linear(f, f, true, rng);
      break;
    case ModelKind::PNA: p.linear = detail::random_linear(f, 12 * in, true, rng); break;
    case ModelKind::DGN: p.linear = detail::random_linear(f, 2 * in, true, rng); break;
    }
    if (config.uses_edge_features() && config.edge_dim > 0)
      p.edge_encoder = detail::random_linear(in, config.edge_dim, true, rng);
    if (!config.gin_epsilon.empty())
      p.epsilon = config.gin_epsilon[l];
    if (config.virtual_node && l + 1 < config.num_layers) {
      p.vn_mlp0 = detail::random_linear(f, in, true, rng, 1.0f / std::sqrt(static_cast<float>(in)));
      p.vn_mlp1 = detail::random_linear(f, f, true, rng);
    }
    m.layers.push_back(std::move(p));
  }
  std::size_t prev = config.output_dim();
  for (std::size_t d : config.head_dims) {
    m.head.push_back(detail::random_linear(d, prev, true, rng));
    prev = d;
  }
  return m;
}

/// Graph/model compatibility: feature widths, edge features for the models
/// that encode them, node field for DGN, virtual node for GIN-VN.
inline void check_compatible(const Graph &g, const ModelConfig &c) {
  if (g.feature_dim() != c.input_dim)
    throw ConfigError("graph feature dim " + std::to_string(g.feature_dim()) + " != model input dim " +
                      std::to_string(c.input_dim));
  if (c.uses_edge_features() && g.edge_dim() != c.edge_dim)
    throw ConfigError("graph edge feature dim " + std::to_string(g.edge_dim()) + " != model edge dim " +
                      std::to_string(c.edge_dim));
  if (c.kind == ModelKind::DGN && !g.has_node_field())
    throw ConfigError("DGN needs a node field (Laplacian eigenvector) on the graph");
  if (c.virtual_node && !g.has_virtual_node())
    throw ConfigError("GIN-VN needs a graph with a virtual node");
}

} // namespace flowgnn

#endif
