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

#ifndef FLOWGNN_SIM_CONFIG_HPP
#define FLOWGNN_SIM_CONFIG_HPP

#include "flowgnn/graph.hpp"
#include "flowgnn/partition.hpp"

#include <limits>
#include <string>
#include <vector>

namespace flowgnn::sim {

enum class PipelineStrategy { NonPipelined, FixedPipeline, BaselineDataflow, MultiQueueDataflow };

inline std::string to_string(PipelineStrategy s) {
  switch (s) {
  case PipelineStrategy::NonPipelined: return "non-pipelined";
  case PipelineStrategy::FixedPipeline: return "fixed-pipeline";
  case PipelineStrategy::BaselineDataflow: return "baseline-dataflow";
  case PipelineStrategy::MultiQueueDataflow: return "multiqueue";
  }
  return "?";
}

inline PipelineStrategy parse_strategy(const std::string &s) {
  if (s == "non-pipelined" || s == "a") return PipelineStrategy::NonPipelined;
  if (s == "fixed-pipeline" || s == "b") return PipelineStrategy::FixedPipeline;
  if (s == "baseline-dataflow" || s == "c") return PipelineStrategy::BaselineDataflow;
  if (s == "multiqueue" || s == "d") return PipelineStrategy::MultiQueueDataflow;
  throw ConfigError("unknown strategy '" + s + "' (expected non-pipelined, fixed-pipeline, baseline-dataflow, multiqueue)");
}

inline constexpr std::size_t kUnboundedQueue = std::numeric_limits<std::size_t>::max();

struct ParallelismConfig {
  std::size_t p_node = 2;
  std::size_t p_edge = 4;
  std::size_t p_apply = 1;
  std::size_t p_scatter = 1;
  std::size_t queue_depth_beats = 16;
  PipelineStrategy strategy = PipelineStrategy::MultiQueueDataflow;
  std::size_t layer_overhead_cycles = 0;

  void validate() const {
    if (p_node == 0 || p_edge == 0 || p_apply == 0 || p_scatter == 0)
      throw ConfigError("parallelism factors must be >= 1");
    if (queue_depth_beats == 0)
      throw ConfigError("queue depth must be >= 1");
  }

  /// Single NT and single MP unit for the three reference strategies.
  std::size_t nt_units() const { return strategy == PipelineStrategy::MultiQueueDataflow ? p_node : 1; }
  std::size_t mp_units() const { return strategy == PipelineStrategy::MultiQueueDataflow ? p_edge : 1; }

  friend bool operator==(const ParallelismConfig &, const ParallelismConfig &) = default;
};

struct NtCost {
  std::size_t accumulate = 0;
  std::size_t output = 0;
  std::size_t total() const { return accumulate + output; }
  friend bool operator==(const NtCost &, const NtCost &) = default;
};

/// Input-stationary NT unit: p_apply input elements per accumulate cycle, one
/// p_apply-wide output beat per output cycle.
inline NtCost nt_unit_cost(std::size_t acc_dim, std::size_t out_dim, std::size_t p_apply) {
  return {ceil_div(acc_dim, p_apply), ceil_div(out_dim, p_apply)};
}

/// Cycles for one edge message of width msg_dim.
inline std::size_t mp_unit_cost(std::size_t msg_dim, std::size_t p_scatter) { return ceil_div(msg_dim, p_scatter); }

/// Slice [lo, hi) of one node's embedding travelling through the adapter.
struct Beat {
  NodeId node = 0;
  std::size_t lo = 0, hi = 0;
};

/// MP queues that receive `node`'s beats: the banks holding at least one of
/// its out-neighbours, ascending. Empty for nodes without out-edges.
inline std::vector<std::size_t> adapter_route(NodeId node, const CsrView &csr, const EdgeBankAssignment &banks) {
  std::vector<bool> hit(banks.p_edge(), false);
  for (std::size_t p = csr.begin(node); p < csr.end(node); ++p)
    hit[banks.bank_of_dst(csr.col_idx[p])] = true;
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < hit.size(); ++q)
    if (hit[q])
      out.push_back(q);
  return out;
}

inline std::vector<std::size_t> adapter_route(const Beat &beat, const CsrView &csr, const EdgeBankAssignment &banks) {
  return adapter_route(beat.node, csr, banks);
}

/// Splits an NT output stream of width `dim` into p_scatter-aligned chunks.
inline std::vector<Beat> rebatch(NodeId node, std::size_t dim, std::size_t p_scatter) {
  std::vector<Beat> out;
  for (std::size_t lo = 0; lo < dim; lo += p_scatter)
    out.push_back({node, lo, std::min(dim, lo + p_scatter)});
  return out;
}

} // namespace flowgnn::sim

#endif
