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

#ifndef FLOWGNN_GRAPH_HPP
#define FLOWGNN_GRAPH_HPP

#include "flowgnn/types.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flowgnn {

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend bool operator==(const Edge &, const Edge &) = default;
};

/// Immutable graph: COO edge list in input order, node features, optional
/// edge features and optional per-node scalar field.
///
/// When `has_virtual_node` is set, node N-1 is the virtual node and the COO
/// list already contains its edges to and from every other node.
class Graph {
public:
  Graph() = default;

  Graph(std::size_t num_nodes, std::vector<Edge> coo, Matrix node_features,
        Matrix edge_features = {}, std::vector<Scalar> node_field = {},
        bool has_virtual_node = false)
      : num_nodes_(num_nodes), coo_(std::move(coo)), node_features_(std::move(node_features)),
        edge_features_(std::move(edge_features)), node_field_(std::move(node_field)),
        has_virtual_node_(has_virtual_node) {
    validate();
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return coo_.size(); }
  const std::vector<Edge> &coo() const { return coo_; }
  const Edge &edge(EdgeId k) const { return coo_[k]; }

  const Matrix &node_features() const { return node_features_; }
  std::size_t feature_dim() const { return node_features_.cols(); }

  bool has_edge_features() const { return edge_features_.cols() > 0; }
  const Matrix &edge_features() const { return edge_features_; }
  std::size_t edge_dim() const { return edge_features_.cols(); }

  bool has_node_field() const { return !node_field_.empty(); }
  const std::vector<Scalar> &node_field() const { return node_field_; }

  bool has_virtual_node() const { return has_virtual_node_; }
  NodeId virtual_node() const { return static_cast<NodeId>(num_nodes_ - 1); }
  bool is_virtual(NodeId v) const { return has_virtual_node_ && v + 1 == num_nodes_; }
  /// Number of nodes that take part in pooling.
  std::size_t num_real_nodes() const { return has_virtual_node_ ? num_nodes_ - 1 : num_nodes_; }

  friend bool operator==(const Graph &, const Graph &) = default;

private:
  void validate() const {
    if (node_features_.rows() != num_nodes_)
      throw FormatError("node feature rows (" + std::to_string(node_features_.rows()) +
                        ") != num_nodes (" + std::to_string(num_nodes_) + ")");
    for (std::size_t k = 0; k < coo_.size(); ++k) {
      if (coo_[k].src >= num_nodes_ || coo_[k].dst >= num_nodes_)
        throw FormatError("edge " + std::to_string(k) + " (" + std::to_string(coo_[k].src) + "," +
                          std::to_string(coo_[k].dst) + ") index out of range for N=" +
                          std::to_string(num_nodes_));
    }
    if (edge_features_.cols() > 0 && edge_features_.rows() != coo_.size())
      throw FormatError("edge feature rows (" + std::to_string(edge_features_.rows()) +
                        ") != num_edges (" + std::to_string(coo_.size()) + ")");
    if (!node_field_.empty() && node_field_.size() != num_nodes_)
      throw FormatError("node field length (" + std::to_string(node_field_.size()) +
                        ") != num_nodes (" + std::to_string(num_nodes_) + ")");
    if (has_virtual_node_ && num_nodes_ == 0)
      throw FormatError("virtual node flag set on an empty graph");
  }

  std::size_t num_nodes_ = 0;
  std::vector<Edge> coo_;
  Matrix node_features_;
  Matrix edge_features_;
  std::vector<Scalar> node_field_;
  bool has_virtual_node_ = false;
};

/// Compressed adjacency keyed by one endpoint. For CSR the key is the source
/// and `col_idx` holds destinations; for CSC the key is the destination and
/// `col_idx` holds sources. `edge_perm[p]` is the COO row of view position p.
struct CompressedView {
  std::vector<EdgeId> row_ptr;
  std::vector<NodeId> col_idx;
  std::vector<EdgeId> edge_perm;

  std::size_t num_rows() const { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
  std::size_t begin(NodeId v) const { return row_ptr[v]; }
  std::size_t end(NodeId v) const { return row_ptr[v + 1]; }
  std::size_t degree(NodeId v) const { return row_ptr[v + 1] - row_ptr[v]; }
};

using CsrView = CompressedView;
using CscView = CompressedView;

namespace detail {

template <typename KeyFn, typename OtherFn>
CompressedView build_view(const Graph &g, KeyFn key, OtherFn other) {
  CompressedView v;
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  v.row_ptr.assign(n + 1, 0);
  for (const Edge &e : g.coo())
    ++v.row_ptr[key(e) + 1];
  for (std::size_t i = 0; i < n; ++i)
    v.row_ptr[i + 1] += v.row_ptr[i];
  v.col_idx.resize(m);
  v.edge_perm.resize(m);
  std::vector<EdgeId> cursor(v.row_ptr.begin(), v.row_ptr.end() - 1);
  // counting sort keeps COO order inside each row
  for (std::size_t k = 0; k < m; ++k) {
    const Edge &e = g.edge(static_cast<EdgeId>(k));
    const EdgeId pos = cursor[key(e)]++;
    v.col_idx[pos] = other(e);
    v.edge_perm[pos] = static_cast<EdgeId>(k);
  }
  return v;
}

} // namespace detail

inline CsrView build_csr(const Graph &g) {
  return detail::build_view(g, [](const Edge &e) { return e.src; },
                            [](const Edge &e) { return e.dst; });
}

inline CscView build_csc(const Graph &g) {
  return detail::build_view(g, [](const Edge &e) { return e.dst; },
                            [](const Edge &e) { return e.src; });
}

enum class Direction { In, Out };

inline std::vector<std::size_t> degrees(const Graph &g, Direction dir) {
  std::vector<std::size_t> deg(g.num_nodes(), 0);
  for (const Edge &e : g.coo())
    ++deg[dir == Direction::In ? e.dst : e.src];
  return deg;
}

/// Order in which NT units visit nodes. The virtual node goes first so its
/// broadcast overlaps the transformation of every other node; everything else
/// keeps its input ID order (no reordering of any kind).
inline std::vector<NodeId> processing_order(const Graph &g) {
  std::vector<NodeId> order;
  order.reserve(g.num_nodes());
  if (g.has_virtual_node())
    order.push_back(g.virtual_node());
  for (NodeId v = 0; v < g.num_real_nodes(); ++v)
    order.push_back(v);
  return order;
}

} // namespace flowgnn

#endif
