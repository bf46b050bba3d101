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

#ifndef FLOWGNN_PARTITION_HPP
#define FLOWGNN_PARTITION_HPP

#include "flowgnn/graph.hpp"

#include <algorithm>
#include <vector>

namespace flowgnn {

/// Assignment of edges to MP units by destination node ID. Each bank owns a
/// contiguous block of destination IDs; bank(v) = floor(v * p_edge / N).
/// Blocks differ in size by at most one node, and the banks for 2*p_edge
/// refine the banks for p_edge.
class EdgeBankAssignment {
public:
  EdgeBankAssignment() = default;
  EdgeBankAssignment(std::size_t num_nodes, std::size_t p_edge, std::vector<std::size_t> counts)
      : num_nodes_(num_nodes), p_edge_(p_edge), per_bank_edge_count_(std::move(counts)) {}

  std::size_t p_edge() const { return p_edge_; }
  std::size_t bank_of_dst(NodeId v) const { return bank_of(v, num_nodes_, p_edge_); }
  const std::vector<std::size_t> &per_bank_edge_count() const { return per_bank_edge_count_; }

  static std::size_t bank_of(NodeId v, std::size_t num_nodes, std::size_t p_edge) {
    return static_cast<std::size_t>((static_cast<std::uint64_t>(v) * p_edge) / num_nodes);
  }

private:
  std::size_t num_nodes_ = 0;
  std::size_t p_edge_ = 1;
  std::vector<std::size_t> per_bank_edge_count_;
};

inline EdgeBankAssignment partition_edges(const Graph &g, std::size_t p_edge) {
  if (p_edge < 1)
    throw ConfigError("p_edge must be >= 1");
  std::vector<std::size_t> counts(p_edge, 0);
  for (const Edge &e : g.coo())
    ++counts[EdgeBankAssignment::bank_of(e.dst, g.num_nodes(), p_edge)];
  return EdgeBankAssignment(g.num_nodes(), p_edge, std::move(counts));
}

/// Largest workload difference between any two MP units, as a percentage of
/// the total edge count.
inline double workload_imbalance(const Graph &g, std::size_t p_edge) {
  if (p_edge < 2)
    throw ConfigError("workload imbalance needs p_edge >= 2");
  if (g.num_edges() == 0)
    throw Error("workload imbalance is undefined for a graph with no edges");
  const auto banks = partition_edges(g, p_edge);
  const auto [lo, hi] = std::minmax_element(banks.per_bank_edge_count().begin(),
                                            banks.per_bank_edge_count().end());
  return 100.0 * static_cast<double>(*hi - *lo) / static_cast<double>(g.num_edges());
}

} // namespace flowgnn

#endif
