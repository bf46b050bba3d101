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

#ifndef FLOWGNN_LAYER_OPS_HPP
#define FLOWGNN_LAYER_OPS_HPP

#include "flowgnn/aggregate.hpp"
#include "flowgnn/graph.hpp"
#include "flowgnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace flowgnn {

/// Per-graph data shared by every layer: adjacency views, degrees, the
/// processing order and the precomputed GCN normalisation / DGN weights.
struct GraphContext {
  const Graph *graph = nullptr;
  CsrView csr;
  CscView csc;
  std::vector<std::size_t> in_degree;
  std::vector<NodeId> order;
  std::vector<Scalar> gcn_inv_sqrt;   ///< 1 / sqrt(in_degree + 1)
  std::vector<Scalar> dgn_weight;     ///< per COO edge
  std::vector<Scalar> dgn_weight_sum; ///< per destination node

  explicit GraphContext(const Graph &g)
      : graph(&g), csr(build_csr(g)), csc(build_csc(g)), in_degree(degrees(g, Direction::In)),
        order(processing_order(g)) {
    gcn_inv_sqrt.resize(g.num_nodes());
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
      gcn_inv_sqrt[v] = 1.0f / std::sqrt(static_cast<Scalar>(in_degree[v] + 1));
    if (g.has_node_field()) {
      const auto &f = g.node_field();
      std::vector<Scalar> denom(g.num_nodes(), 0.0f);
      for (const Edge &e : g.coo())
        denom[e.dst] += std::abs(f[e.src] - f[e.dst]);
      dgn_weight.resize(g.num_edges());
      dgn_weight_sum.assign(g.num_nodes(), 0.0f);
      for (std::size_t k = 0; k < g.num_edges(); ++k) {
        const Edge &e = g.edge(static_cast<EdgeId>(k));
        dgn_weight[k] = (f[e.src] - f[e.dst]) / (denom[e.dst] + 1e-8f);
        dgn_weight_sum[e.dst] += dgn_weight[k];
      }
    }
  }
};

enum class Dataflow { Scatter, Gather };
enum class LinearSide { Pre, Post };

/// One GNN layer split into the pieces the dataflow executes:
///   pre     node transformation producing the message vector h_i
///   scatter element range [lo, hi) of one edge message folded into the
///           destination state
///   gather  whole-neighbourhood reduction (attention)
///   post    node transformation turning (h_i, state_i) into the output
/// `pre` of layer l+1 and `post` of layer l run back-to-back on the same NT unit.
class LayerOps {
public:
  LayerOps(const GraphContext &ctx, const ModelConfig &config, const LayerParams &params, std::size_t layer)
      : ctx_(ctx), config_(config), params_(params), layer_(layer), in_(config.layer_in_dim(layer)),
        out_(config.hidden_dim) {}
  virtual ~LayerOps() = default;

  virtual Dataflow dataflow() const { return Dataflow::Scatter; }
  virtual LinearSide linear_side() const { return LinearSide::Post; }
  std::size_t in_dim() const { return in_; }
  virtual std::size_t msg_dim() const { return in_; }
  virtual std::size_t state_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  /// Width of the vector accumulated by the linear that dominates NT cost.
  virtual std::size_t nt_acc_dim() const = 0;
  std::size_t nt_out_dim() const { return linear_side() == LinearSide::Pre ? msg_dim() : out_; }
  /// Per-neighbour score width for gather-style layers.
  virtual std::size_t score_dim() const { return 0; }
  virtual bool uses_virtual_node() const { return false; }

  virtual void pre(NodeId, std::span<const Scalar> x, std::span<const Scalar>, std::span<Scalar> h) const {
    std::copy(x.begin(), x.end(), h.begin());
  }
  virtual void init_state(std::span<Scalar> s) const { std::fill(s.begin(), s.end(), 0.0f); }
  virtual void scatter(EdgeId, NodeId, NodeId, std::span<const Scalar>, std::span<Scalar>, std::size_t,
                       std::size_t) const {}
  virtual void gather(NodeId, const Matrix &, std::span<Scalar>) const {}
  virtual void post(NodeId i, std::span<const Scalar> h, std::span<const Scalar> s, std::span<Scalar> out) const = 0;

protected:
  Scalar edge_enc(EdgeId k, std::size_t e) const {
    const Linear &enc = params_.edge_encoder;
    if (enc.empty())
      return 0.0f;
    const auto ef = ctx_.graph->edge_features().row(k);
    Scalar v = enc.bias[e];
    for (std::size_t d = 0; d < ef.size(); ++d)
      v += enc.weight(e, d) * ef[d];
    return v;
  }

  const GraphContext &ctx_;
  const ModelConfig &config_;
  const LayerParams &params_;
  std::size_t layer_;
  std::size_t in_, out_;
};

inline Scalar relu(Scalar v) { return v > 0.0f ? v : 0.0f; }

inline void relu_inplace(std::span<Scalar> v) {
  for (auto &x : v)
    x = relu(x);
}

/// Linear -> ReLU -> Linear.
inline void apply_mlp(const Linear &a, const Linear &b, std::span<const Scalar> x, std::span<Scalar> y) {
  std::vector<Scalar> mid(a.out_dim());
  a.apply(x, mid);
  relu_inplace(mid);
  b.apply(mid, y);
}

class GcnOps final : public LayerOps {
public:
  using LayerOps::LayerOps;
  LinearSide linear_side() const override { return LinearSide::Pre; }
  std::size_t msg_dim() const override { return out_; }
  std::size_t state_dim() const override { return out_; }
  std::size_t nt_acc_dim() const override { return in_; }

  void pre(NodeId, std::span<const Scalar> x, std::span<const Scalar>, std::span<Scalar> h) const override {
    params_.linear.apply(x, h);
  }
  void scatter(EdgeId, NodeId src, NodeId dst, std::span<const Scalar> h, std::span<Scalar> s, std::size_t lo,
               std::size_t hi) const override {
    const Scalar norm = ctx_.gcn_inv_sqrt[src] * ctx_.gcn_inv_sqrt[dst];
    for (std::size_t e = lo; e < hi; ++e)
      s[e] += norm * h[e];
  }
  void post(NodeId i, std::span<const Scalar> h, std::span<const Scalar> s, std::span<Scalar> out) const override {
    const Scalar self = ctx_.gcn_inv_sqrt[i] * ctx_.gcn_inv_sqrt[i];
    for (std::size_t e = 0; e < out.size(); ++e)
      out[e] = relu(s[e] + self * h[e]);
  }
};

class GinOps final : public LayerOps {
public:
  using LayerOps::LayerOps;
  std::size_t nt_acc_dim() const override { return in_; }
  bool uses_virtual_node() const override { return config_.virtual_node; }

  void pre(NodeId i, std::span<const Scalar> x, std::span<const Scalar> vn, std::span<Scalar> h) const override {
    if (!is_vn(i) && !vn.empty()) {
      for (std::size_t e = 0; e < h.size(); ++e)
        h[e] = x[e] + vn[e];
    } else {
      std::copy(x.begin(), x.end(), h.begin());
    }
  }
  void scatter(EdgeId k, NodeId src, NodeId dst, std::span<const Scalar> h, std::span<Scalar> s, std::size_t lo,
               std::size_t hi) const override {
    if (is_vn(src))
      return; // broadcast edge: the virtual-node state was folded into pre()
    if (is_vn(dst)) {
      for (std::size_t e = lo; e < hi; ++e)
        s[e] += h[e];
      return;
    }
    for (std::size_t e = lo; e < hi; ++e)
      s[e] += relu(h[e] + edge_enc(k, e));
  }
  void post(NodeId i, std::span<const Scalar> h, std::span<const Scalar> s, std::span<Scalar> out) const override {
    std::vector<Scalar> z(in_);
    if (is_vn(i)) {
      if (params_.vn_mlp0.empty()) {
        std::fill(out.begin(), out.end(), 0.0f);
        return;
      }
      for (std::size_t e = 0; e < in_; ++e)
        z[e] = h[e] + s[e];
      apply_mlp(params_.vn_mlp0, params_.vn_mlp1, z, out);
      return;
    }
    const Scalar scale = 1.0f + params_.epsilon;
    for (std::size_t e = 0; e < in_; ++e)
      z[e] = scale * h[e] + s[e];
    apply_mlp(params_.mlp0, params_.mlp1, z, out);
  }

private:
  bool is_vn(NodeId v) const { return config_.virtual_node && ctx_.graph->is_virtual(v); }
};

class PnaOps final : public LayerOps {
public:
  using LayerOps::LayerOps;
  std::size_t state_dim() const override { return AggregatorState::kBlocks * in_; }
  std::size_t nt_acc_dim() const override { return 12 * in_; }

  void init_state(std::span<Scalar> s) const override { AggregatorState::init(s, in_); }
  void scatter(EdgeId k, NodeId, NodeId, std::span<const Scalar> h, std::span<Scalar> s, std::size_t lo,
               std::size_t hi) const override {
    for (std::size_t e = lo; e < hi; ++e)
      AggregatorState::push(s, in_, e, relu(h[e] + edge_enc(k, e)));
  }
  void post(NodeId i, std::span<const Scalar>, std::span<const Scalar> s, std::span<Scalar> out) const override {
    const std::size_t f = in_;
    const std::size_t d = ctx_.in_degree[i];
    std::vector<Scalar> y(12 * f, 0.0f);
    if (d > 0) {
      const Scalar logd = std::log(static_cast<Scalar>(d) + 1.0f);
      const Scalar scalers[3] = {1.0f, logd / config_.pna_avg_log_degree, config_.pna_avg_log_degree / logd};
      constexpr AggregatorKind kinds[4] = {AggregatorKind::Mean, AggregatorKind::Std, AggregatorKind::Max,
                                           AggregatorKind::Min};
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t e = 0; e < f; ++e) {
          const Scalar v = AggregatorState::finalize(s, f, d, kinds[a], e);
          for (std::size_t sc = 0; sc < 3; ++sc)
            y[(sc * 4 + a) * f + e] = scalers[sc] * v;
        }
    }
    params_.linear.apply(y, out);
    relu_inplace(out);
  }
};

class DgnOps final : public LayerOps {
public:
  using LayerOps::LayerOps;
  std::size_t state_dim() const override { return 2 * in_; }
  std::size_t nt_acc_dim() const override { return 2 * in_; }

  void scatter(EdgeId k, NodeId, NodeId, std::span<const Scalar> h, std::span<Scalar> s, std::size_t lo,
               std::size_t hi) const override {
    const Scalar w = ctx_.dgn_weight[k];
    for (std::size_t e = lo; e < hi; ++e) {
      s[e] += h[e];
      s[in_ + e] += w * h[e];
    }
  }
  void post(NodeId i, std::span<const Scalar> h, std::span<const Scalar> s, std::span<Scalar> out) const override {
    const std::size_t f = in_;
    const std::size_t d = ctx_.in_degree[i];
    const Scalar wsum = ctx_.dgn_weight_sum[i];
    std::vector<Scalar> y(2 * f);
    for (std::size_t e = 0; e < f; ++e) {
      y[e] = d > 0 ? s[e] / static_cast<Scalar>(d) : 0.0f;
      y[f + e] = std::abs(s[f + e] - h[e] * wsum);
    }
    params_.linear.apply(y, out);
    relu_inplace(out);
  }
};

class GatOps final : public LayerOps {
public:
  using LayerOps::LayerOps;
  Dataflow dataflow() const override { return Dataflow::Gather; }
  LinearSide linear_side() const override { return LinearSide::Pre; }
  std::size_t msg_dim() const override { return out_; }
  std::size_t state_dim() const override { return out_ + config_.gat_heads; }
  std::size_t nt_acc_dim() const override { return in_; }
  std::size_t score_dim() const override { return config_.gat_heads; }

  void pre(NodeId, std::span<const Scalar> x, std::span<const Scalar>, std::span<Scalar> h) const override {
    params_.linear.apply(x, h);
  }
  void gather(NodeId i, const Matrix &hs, std::span<Scalar> s) const override {
    const std::size_t heads = config_.gat_heads, fh = config_.gat_head_dim;
    const auto &col = ctx_.csc;
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const Scalar t = dot(params_.att_target, hd, hs.row(i));
      auto score = [&](NodeId j) {
        const Scalar v = t + dot(params_.att_neighbor, hd, hs.row(j));
        return v > 0.0f ? v : config_.gat_leaky_slope * v;
      };
      Scalar m = score(i);
      for (std::size_t p = col.begin(i); p < col.end(i); ++p)
        m = std::max(m, score(col.col_idx[p]));
      Scalar &sum = s[out_ + hd];
      auto fold = [&](NodeId j) {
        const Scalar w = std::exp(score(j) - m);
        sum += w;
        const auto hj = hs.row(j);
        for (std::size_t f = hd * fh; f < (hd + 1) * fh; ++f)
          s[f] += w * hj[f];
      };
      fold(i);
      for (std::size_t p = col.begin(i); p < col.end(i); ++p)
        fold(col.col_idx[p]);
    }
  }
  void post(NodeId, std::span<const Scalar>, std::span<const Scalar> s, std::span<Scalar> out) const override {
    const std::size_t fh = config_.gat_head_dim;
    for (std::size_t e = 0; e < out_; ++e)
      out[e] = s[e] / s[out_ + e / fh];
  }

private:
  Scalar dot(const Matrix &att, std::size_t hd, std::span<const Scalar> h) const {
    const std::size_t fh = config_.gat_head_dim;
    Scalar v = 0.0f;
    for (std::size_t f = 0; f < fh; ++f)
      v += att(hd, f) * h[hd * fh + f];
    return v;
  }
};

inline std::unique_ptr<LayerOps> make_layer_ops(const GraphContext &ctx, const Model &model, std::size_t layer) {
  const auto &c = model.config;
  const auto &p = model.layers.at(layer);
  switch (c.kind) {
  case ModelKind::GCN: return std::make_unique<GcnOps>(ctx, c, p, layer);
  case ModelKind::GIN: return std::make_unique<GinOps>(ctx, c, p, layer);
  case ModelKind::PNA: return std::make_unique<PnaOps>(ctx, c, p, layer);
  case ModelKind::DGN: return std::make_unique<DgnOps>(ctx, c, p, layer);
  case ModelKind::GAT: return std::make_unique<GatOps>(ctx, c, p, layer);
  }
  throw ConfigError("unknown model kind");
}

} // namespace flowgnn

#endif
