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

#ifndef FLOWGNN_DSE_HPP
#define FLOWGNN_DSE_HPP

#include "flowgnn/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

namespace flowgnn::dse {

using sim::ParallelismConfig;
using sim::PipelineStrategy;
using sim::SimReport;

enum class Bottleneck { NtBound, MpBound, QueueBound };

inline std::string to_string(Bottleneck b) {
  switch (b) {
  case Bottleneck::NtBound: return "NT-bound";
  case Bottleneck::MpBound: return "MP-bound";
  case Bottleneck::QueueBound: return "queue-bound";
  }
  return "?";
}

struct UnitUtilization {
  std::string name;
  std::uint64_t busy = 0, idle = 0;
  double utilization = 0.0;
};

struct BottleneckReport {
  Bottleneck tag = Bottleneck::MpBound;
  double min_nt_idle_fraction = 0.0;
  double min_mp_idle_fraction = 0.0;
  double max_queue_stall_fraction = 0.0;          ///< any full-queue stall
  double max_blocking_stall_fraction = 0.0;       ///< stalls with an idle consumer
  std::vector<UnitUtilization> units;
};

inline constexpr double kQueueBoundThreshold = 0.10;

/// Queue-bound when, for more than `threshold` of the run, some full queue
/// holds its producer stalled while the queue's own consumer is idle as well
/// (the MP unit waits on a different queue, so the stall is caused by queue
/// capacity rather than MP throughput). Otherwise the side whose busiest unit
/// idles less is the bottleneck.
inline BottleneckReport bottleneck_report(const SimReport &r, double threshold = kQueueBoundThreshold) {
  BottleneckReport out;
  const double total = std::max<double>(1.0, static_cast<double>(r.total_cycles));
  auto min_idle = [&](const std::vector<sim::UnitStats> &units) {
    double m = 1.0;
    for (const auto &u : units) {
      m = std::min(m, static_cast<double>(u.idle) / total);
      out.units.push_back({u.name, u.busy, u.idle, static_cast<double>(u.busy) / total});
    }
    return m;
  };
  out.min_nt_idle_fraction = min_idle(r.nt_units);
  out.min_mp_idle_fraction = min_idle(r.mp_units);
  for (const auto &q : r.queues) {
    out.max_queue_stall_fraction =
        std::max(out.max_queue_stall_fraction, static_cast<double>(q.full_stall_cycles) / total);
    out.max_blocking_stall_fraction =
        std::max(out.max_blocking_stall_fraction, static_cast<double>(q.consumer_idle_stall_cycles) / total);
  }
  if (out.max_blocking_stall_fraction > threshold)
    out.tag = Bottleneck::QueueBound;
  else if (out.min_nt_idle_fraction < out.min_mp_idle_fraction)
    out.tag = Bottleneck::NtBound;
  else
    out.tag = Bottleneck::MpBound;
  return out;
}

/// Sums cycle and utilisation counters of reports produced with the same
/// configuration on different graphs.
inline SimReport merge_reports(const std::vector<SimReport> &reports) {
  SimReport m = reports.at(0);
  m.trace.clear();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto &r = reports[i];
    m.total_cycles += r.total_cycles;
    for (std::size_t u = 0; u < m.nt_units.size(); ++u) {
      m.nt_units[u].busy += r.nt_units[u].busy;
      m.nt_units[u].idle += r.nt_units[u].idle;
    }
    for (std::size_t u = 0; u < m.mp_units.size(); ++u) {
      m.mp_units[u].busy += r.mp_units[u].busy;
      m.mp_units[u].idle += r.mp_units[u].idle;
    }
    for (std::size_t q = 0; q < m.queues.size() && q < r.queues.size(); ++q) {
      m.queues[q].full_stall_cycles += r.queues[q].full_stall_cycles;
      m.queues[q].consumer_idle_stall_cycles += r.queues[q].consumer_idle_stall_cycles;
      m.queues[q].max_occupancy = std::max(m.queues[q].max_occupancy, r.queues[q].max_occupancy);
    }
  }
  return m;
}

inline double geomean(const std::vector<std::uint64_t> &v) {
  if (v.empty())
    return 0.0;
  double s = 0.0;
  for (auto x : v)
    s += std::log(static_cast<double>(std::max<std::uint64_t>(x, 1)));
  return std::exp(s / static_cast<double>(v.size()));
}

inline double mean(const std::vector<std::uint64_t> &v) {
  if (v.empty())
    return 0.0;
  double s = 0.0;
  for (auto x : v)
    s += static_cast<double>(x);
  return s / static_cast<double>(v.size());
}

struct SweepSpec {
  std::vector<std::size_t> p_node{1, 2, 4};
  std::vector<std::size_t> p_edge{1, 2, 4};
  std::vector<std::size_t> p_apply{1, 2, 4};
  std::vector<std::size_t> p_scatter{1, 2, 4, 8};
  std::vector<PipelineStrategy> strategies{PipelineStrategy::MultiQueueDataflow};
  ParallelismConfig baseline{1, 1, 1, 1, 16, PipelineStrategy::MultiQueueDataflow, 0};
  std::size_t queue_depth_beats = 16;
  std::size_t layer_overhead_cycles = 0;
  double queue_bound_threshold = kQueueBoundThreshold;
  std::size_t threads = 1;

  void validate() const {
    if (p_node.empty() || p_edge.empty() || p_apply.empty() || p_scatter.empty() || strategies.empty())
      throw ConfigError("sweep grid dimensions must be non-empty");
    auto has = [](const auto &v, auto x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    const auto &b = baseline;
    if (!has(p_node, b.p_node) || !has(p_edge, b.p_edge) || !has(p_apply, b.p_apply) ||
        !has(p_scatter, b.p_scatter) || !has(strategies, b.strategy))
      throw ConfigError("sweep baseline configuration must be part of the grid");
  }
};

struct SweepRow {
  ParallelismConfig config;
  std::vector<std::uint64_t> cycles; ///< per graph
  double cycles_geomean = 0.0;
  double cycles_mean = 0.0;
  double speedup = 0.0;
  Bottleneck bottleneck = Bottleneck::MpBound;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t baseline_row = 0;
};

namespace detail {

template <typename T> std::vector<T> canonical(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline SweepRow evaluate(const ParallelismConfig &pc, const std::vector<Graph> &graphs, const Model &model,
                         double threshold) {
  SweepRow row;
  row.config = pc;
  try {
    std::vector<SimReport> reps;
    for (const auto &g : graphs) {
      reps.push_back(sim::simulate(g, model, pc));
      reps.back().prediction.clear();
      row.cycles.push_back(reps.back().total_cycles);
    }
    row.cycles_geomean = geomean(row.cycles);
    row.cycles_mean = mean(row.cycles);
    row.bottleneck = bottleneck_report(merge_reports(reps), threshold).tag;
  } catch (const std::exception &e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn> void parallel_for(std::size_t n, std::size_t threads, Fn &&fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++)
        fn(i);
    });
  for (auto &th : pool)
    th.join();
}

} // namespace detail

/// Evaluates every grid point on every graph. Rows are ordered
/// lexicographically by (p_node, p_edge, p_apply, p_scatter, strategy)
/// whatever the evaluation order.
inline SweepResult run_sweep(const SweepSpec &spec, const std::vector<Graph> &graphs, const Model &model) {
  spec.validate();
  if (graphs.empty())
    throw ConfigError("sweep needs at least one graph");
  std::vector<ParallelismConfig> grid;
  for (auto pn : detail::canonical(spec.p_node))
    for (auto pe : detail::canonical(spec.p_edge))
      for (auto pa : detail::canonical(spec.p_apply))
        for (auto ps : detail::canonical(spec.p_scatter))
          for (auto st : detail::canonical(spec.strategies))
            grid.push_back({pn, pe, pa, ps, spec.queue_depth_beats, st, spec.layer_overhead_cycles});
  SweepResult res;
  res.rows.resize(grid.size());
  detail::parallel_for(grid.size(), spec.threads, [&](std::size_t i) {
    res.rows[i] = detail::evaluate(grid[i], graphs, model, spec.queue_bound_threshold);
  });
  ParallelismConfig base = spec.baseline;
  base.queue_depth_beats = spec.queue_depth_beats;
  base.layer_overhead_cycles = spec.layer_overhead_cycles;
  const auto it = std::find_if(res.rows.begin(), res.rows.end(), [&](const SweepRow &r) { return r.config == base; });
  res.baseline_row = static_cast<std::size_t>(it - res.rows.begin());
  if (it->failed)
    throw Error("baseline configuration failed: " + it->error);
  const double ref = it->cycles_geomean;
  for (auto &r : res.rows)
    if (!r.failed)
      r.speedup = ref / r.cycles_geomean;
  return res;
}

inline std::string sweep_csv_header() {
  return "p_node,p_edge,p_apply,p_scatter,strategy,cycles_geomean,speedup,bottleneck";
}

inline void write_sweep_csv(std::ostream &os, const SweepResult &res) {
  os << sweep_csv_header() << '\n';
  for (const auto &r : res.rows) {
    const auto &c = r.config;
    os << c.p_node << ',' << c.p_edge << ',' << c.p_apply << ',' << c.p_scatter << ',' << sim::to_string(c.strategy)
       << ',';
    if (r.failed)
      os << "failed,failed,failed\n";
    else
      os << sim::report_detail::fixed(r.cycles_geomean, 3) << ',' << sim::report_detail::fixed(r.speedup, 6) << ','
         << to_string(r.bottleneck) << '\n';
  }
}

struct AblationRow {
  std::string label;
  ParallelismConfig config;
  std::vector<std::uint64_t> cycles;
  double cycles_geomean = 0.0;
  double cycles_mean = 0.0;
  double speedup_vs_previous = 1.0;
  double speedup_vs_first = 1.0;
};

/// The strategy ladder: non-pipelined, fixed pipeline, baseline dataflow, then
/// the multi-queue dataflow as FlowGNN-P_apply-P_scatter with one NT and one MP
/// unit: 1-1, 1-2, 2-2.
inline std::vector<AblationRow> ablation(const std::vector<Graph> &graphs, const Model &model,
                                         std::size_t queue_depth_beats = 16) {
  if (graphs.empty())
    throw ConfigError("ablation needs at least one graph");
  using S = PipelineStrategy;
  const std::vector<std::pair<std::string, ParallelismConfig>> ladder = {
      {"non-pipelined", {1, 1, 1, 1, queue_depth_beats, S::NonPipelined, 0}},
      {"fixed-pipeline", {1, 1, 1, 1, queue_depth_beats, S::FixedPipeline, 0}},
      {"baseline-dataflow", {1, 1, 1, 1, queue_depth_beats, S::BaselineDataflow, 0}},
      {"multiqueue-1-1", {1, 1, 1, 1, queue_depth_beats, S::MultiQueueDataflow, 0}},
      {"multiqueue-1-2", {1, 1, 1, 2, queue_depth_beats, S::MultiQueueDataflow, 0}},
      {"multiqueue-2-2", {1, 1, 2, 2, queue_depth_beats, S::MultiQueueDataflow, 0}},
  };
  std::vector<AblationRow> rows;
  for (const auto &[label, pc] : ladder) {
    AblationRow row{label, pc, {}, 0.0, 0.0, 1.0, 1.0};
    for (const auto &g : graphs)
      row.cycles.push_back(sim::simulate(g, model, pc).total_cycles);
    row.cycles_geomean = geomean(row.cycles);
    row.cycles_mean = mean(row.cycles);
    if (!rows.empty()) {
      row.speedup_vs_previous = rows.back().cycles_geomean / row.cycles_geomean;
      row.speedup_vs_first = rows.front().cycles_geomean / row.cycles_geomean;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_ablation_csv(std::ostream &os, const std::vector<AblationRow> &rows) {
  os << "label,strategy,p_apply,p_scatter,cycles_geomean,cycles_mean,speedup_vs_previous,speedup_vs_first\n";
  for (const auto &r : rows)
    os << r.label << ',' << sim::to_string(r.config.strategy) << ',' << r.config.p_apply << ','
       << r.config.p_scatter << ',' << sim::report_detail::fixed(r.cycles_geomean, 3) << ','
       << sim::report_detail::fixed(r.cycles_mean, 3) << ',' << sim::report_detail::fixed(r.speedup_vs_previous, 6)
       << ',' << sim::report_detail::fixed(r.speedup_vs_first, 6) << '\n';
}

} // namespace flowgnn::dse

#endif
