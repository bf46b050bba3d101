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

#ifndef FLOWGNN_SYNTHETIC_HPP
#define FLOWGNN_SYNTHETIC_HPP

#include "flowgnn/graph.hpp"
#include "flowgnn/rng.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace flowgnn {

enum class Topology { Uniform, PowerLaw, WithVirtualNode };

inline Topology parse_topology(const std::string &s) {
  if (s == "uniform")
    return Topology::Uniform;
  if (s == "power-law")
    return Topology::PowerLaw;
  if (s == "with-virtual-node")
    return Topology::WithVirtualNode;
  throw ConfigError("unknown topology '" + s + "'");
}

struct SyntheticSpec {
  std::size_t num_nodes = 16;
  double avg_degree = 4.0; ///< average out-degree (= in-degree) over real nodes
  Topology topology = Topology::Uniform;
  std::size_t feature_dim = 8;
  std::size_t edge_dim = 0;
  std::uint64_t seed = 0;
  bool with_field = false;
};

namespace detail {

// Random simple undirected graph on n nodes, each edge stored in both
// directions.
inline void uniform_edges(std::size_t n, double avg_degree, Rng &rng, std::vector<Edge> &coo) {
  if (n < 2)
    return;
  const std::uint64_t max_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t pairs =
      std::min<std::uint64_t>(max_pairs, static_cast<std::uint64_t>(std::llround(avg_degree * n / 2.0)));
  std::set<std::pair<NodeId, NodeId>> seen;
  while (seen.size() < pairs) {
    auto u = static_cast<NodeId>(rng.below(n));
    auto v = static_cast<NodeId>(rng.below(n));
    if (u == v)
      continue;
    if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
      continue;
    coo.push_back({u, v});
    coo.push_back({v, u});
  }
}

// Preferential attachment: every new node links to `m` distinct earlier nodes
// chosen proportionally to their current degree.
inline void power_law_edges(std::size_t n, double avg_degree, Rng &rng, std::vector<Edge> &coo) {
  if (n < 2)
    return;
  const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(avg_degree / 2.0)));
  std::vector<NodeId> endpoints; // each node appears once per incident edge
  const std::size_t seed_nodes = std::min(n, m + 1);
  for (NodeId u = 0; u < seed_nodes; ++u)
    for (NodeId v = u + 1; v < seed_nodes; ++v) {
      coo.push_back({u, v});
      coo.push_back({v, u});
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  for (NodeId u = static_cast<NodeId>(seed_nodes); u < n; ++u) {
    std::set<NodeId> targets;
    const std::size_t want = std::min<std::size_t>(m, u);
    while (targets.size() < want) {
      const NodeId t = endpoints.empty() ? static_cast<NodeId>(rng.below(u))
                                         : endpoints[rng.below(endpoints.size())];
      targets.insert(t);
    }
    for (NodeId t : targets) {
      coo.push_back({u, t});
      coo.push_back({t, u});
      endpoints.push_back(u);
      endpoints.push_back(t);
    }
  }
}

} // namespace detail

/// Deterministic synthetic graph for tests and benchmarks. Features (node,
/// edge, field) are uniform in [-1, 1]. For `WithVirtualNode`, node N-1 is
/// connected in both directions to each of the other N-1 nodes.
inline Graph gen_synthetic(const SyntheticSpec &spec) {
  if (spec.num_nodes < 1)
    throw ConfigError("synthetic graph needs at least one node");
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;
  const bool vn = spec.topology == Topology::WithVirtualNode;
  const std::size_t real = vn ? n - 1 : n;
  std::vector<Edge> coo;
  if (spec.topology == Topology::PowerLaw)
    detail::power_law_edges(real, spec.avg_degree, rng, coo);
  else
    detail::uniform_edges(real, spec.avg_degree, rng, coo);
  if (vn) {
    const auto v = static_cast<NodeId>(n - 1);
    for (NodeId i = 0; i < real; ++i) {
      coo.push_back({i, v});
      coo.push_back({v, i});
    }
  }
  Matrix x(n, spec.feature_dim);
  for (auto &val : x.data())
    val = rng.uniform(-1.0f, 1.0f);
  Matrix ef(spec.edge_dim > 0 ? coo.size() : 0, spec.edge_dim);
  for (auto &val : ef.data())
    val = rng.uniform(-1.0f, 1.0f);
  std::vector<Scalar> field;
  if (spec.with_field) {
    field.resize(n);
    for (auto &val : field)
      val = rng.uniform(-1.0f, 1.0f);
  }
  return Graph(n, std::move(coo), std::move(x), std::move(ef), std::move(field), vn);
}

} // namespace flowgnn

#endif
