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

#ifndef FLOWGNN_KERNELS_HPP
#define FLOWGNN_KERNELS_HPP

#include "flowgnn/layer_ops.hpp"

namespace flowgnn {

/// Node embeddings between layers (N x F) and the index of the layer that produced them.
struct EmbeddingBuffer {
  Matrix values;
  std::size_t layer = 0;
};

/// Initial embeddings: raw node features, with the virtual node's row zeroed
/// for models that keep a virtual-node state.
inline Matrix initial_embeddings(const Graph &g, const ModelConfig &c) {
  Matrix x = g.node_features();
  if (c.virtual_node && g.has_virtual_node())
    std::fill(x.row(g.virtual_node()).begin(), x.row(g.virtual_node()).end(), 0.0f);
  return x;
}

/// Executes one layer: pre on every node, then message passing in the view
/// order (sources in processing order, CSR row in COO order; or CSC columns
/// for gather-style layers), then post.
inline Matrix run_layer(const GraphContext &ctx, const LayerOps &ops, const Matrix &x) {
  const Graph &g = *ctx.graph;
  const std::size_t n = g.num_nodes();
  if (x.rows() != n || x.cols() != ops.in_dim())
    throw ConfigError("embedding shape " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                      " does not match layer input " + std::to_string(n) + "x" + std::to_string(ops.in_dim()));
  std::span<const Scalar> vn;
  if (ops.uses_virtual_node() && g.has_virtual_node())
    vn = x.row(g.virtual_node());
  Matrix h(n, ops.msg_dim());
  for (NodeId i : ctx.order)
    ops.pre(i, x.row(i), vn, h.row(i));
  Matrix state(n, ops.state_dim());
  for (NodeId i = 0; i < n; ++i)
    ops.init_state(state.row(i));
  if (ops.dataflow() == Dataflow::Scatter) {
    for (NodeId j : ctx.order)
      for (std::size_t p = ctx.csr.begin(j); p < ctx.csr.end(j); ++p) {
        const NodeId i = ctx.csr.col_idx[p];
        ops.scatter(ctx.csr.edge_perm[p], j, i, h.row(j), state.row(i), 0, ops.msg_dim());
      }
  } else {
    for (NodeId i : ctx.order)
      ops.gather(i, h, state.row(i));
  }
  Matrix out(n, ops.out_dim());
  for (NodeId i : ctx.order)
    ops.post(i, h.row(i), state.row(i), out.row(i));
  return out;
}

namespace detail {

inline EmbeddingBuffer single_layer(const Graph &g, const EmbeddingBuffer &x, const Model &model, ModelKind kind,
                                    std::size_t layer) {
  if (model.config.kind != kind)
    throw ConfigError("layer kernel called with a " + to_string(model.config.kind) + " model");
  GraphContext ctx(g);
  auto ops = make_layer_ops(ctx, model, layer);
  return {run_layer(ctx, *ops, x.values), layer + 1};
}

} // namespace detail

inline EmbeddingBuffer gin_layer(const Graph &g, const EmbeddingBuffer &x, const Model &m, std::size_t layer) {
  return detail::single_layer(g, x, m, ModelKind::GIN, layer);
}
inline EmbeddingBuffer gcn_layer(const Graph &g, const EmbeddingBuffer &x, const Model &m, std::size_t layer) {
  return detail::single_layer(g, x, m, ModelKind::GCN, layer);
}
inline EmbeddingBuffer gat_layer(const Graph &g, const EmbeddingBuffer &x, const Model &m, std::size_t layer) {
  return detail::single_layer(g, x, m, ModelKind::GAT, layer);
}
inline EmbeddingBuffer pna_layer(const Graph &g, const EmbeddingBuffer &x, const Model &m, std::size_t layer) {
  return detail::single_layer(g, x, m, ModelKind::PNA, layer);
}
inline EmbeddingBuffer dgn_layer(const Graph &g, const EmbeddingBuffer &x, const Model &m, std::size_t layer) {
  return detail::single_layer(g, x, m, ModelKind::DGN, layer);
}

/// One GIN-VN layer in the explicit form: x_i += vn for real nodes, the GIN
/// layer on real edges, then vn' = MLP(vn + sum_i x_i). The virtual node's
/// row in `x` is ignored and the returned buffer carries vn' in that row.
inline std::pair<EmbeddingBuffer, std::vector<Scalar>>
virtual_node_step(const Graph &g, const EmbeddingBuffer &x, std::span<const Scalar> vn_state, const Model &m,
                  std::size_t layer) {
  if (!m.config.virtual_node || !g.has_virtual_node())
    throw ConfigError("virtual_node_step needs a GIN-VN model and a graph with a virtual node");
  EmbeddingBuffer in = x;
  const NodeId vn = g.virtual_node();
  std::copy(vn_state.begin(), vn_state.end(), in.values.row(vn).begin());
  EmbeddingBuffer out = gin_layer(g, in, m, layer);
  const auto row = out.values.row(vn);
  return {out, std::vector<Scalar>(row.begin(), row.end())};
}

/// Mean over real nodes (the virtual node is excluded).
inline std::vector<Scalar> global_mean_pool(const Graph &g, const Matrix &x) {
  std::vector<Scalar> pooled(x.cols(), 0.0f);
  const std::size_t n = g.num_real_nodes();
  for (NodeId i = 0; i < n; ++i)
    for (std::size_t e = 0; e < x.cols(); ++e)
      pooled[e] += x(i, e);
  if (n > 0)
    for (auto &v : pooled)
      v /= static_cast<Scalar>(n);
  return pooled;
}

/// Linear+ReLU chain with a final linear layer.
inline std::vector<Scalar> mlp_head(std::span<const Scalar> v, const std::vector<Linear> &head) {
  std::vector<Scalar> cur(v.begin(), v.end());
  for (std::size_t k = 0; k < head.size(); ++k) {
    std::vector<Scalar> next(head[k].out_dim());
    head[k].apply(cur, next);
    if (k + 1 < head.size())
      relu_inplace(next);
    cur = std::move(next);
  }
  return cur;
}

struct ModelOutput {
  Matrix embeddings; ///< final node embeddings
  std::vector<Scalar> prediction;
};

inline ModelOutput run_model_full(const Graph &g, const Model &model) {
  model.validate();
  check_compatible(g, model.config);
  GraphContext ctx(g);
  Matrix x = initial_embeddings(g, model.config);
  for (std::size_t l = 0; l < model.config.num_layers; ++l) {
    auto ops = make_layer_ops(ctx, model, l);
    x = run_layer(ctx, *ops, x);
  }
  auto pred = mlp_head(global_mean_pool(g, x), model.head);
  return {std::move(x), std::move(pred)};
}

inline std::vector<Scalar> run_model(const Graph &g, const Model &model) { return run_model_full(g, model).prediction; }

} // namespace flowgnn

#endif
