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

#ifndef FLOWGNN_SIM_REPORT_HPP
#define FLOWGNN_SIM_REPORT_HPP

#include "flowgnn/graph_io.hpp"
#include "flowgnn/sim/config.hpp"

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace flowgnn::sim {

struct TraceRecord {
  std::uint64_t cycle = 0;
  std::string unit;
  std::string event;
  std::uint64_t id = 0;
  std::string detail;

  friend bool operator==(const TraceRecord &, const TraceRecord &) = default;
};

struct UnitStats {
  std::string name;
  std::uint64_t busy = 0;
  std::uint64_t idle = 0;
  friend bool operator==(const UnitStats &, const UnitStats &) = default;
};

struct QueueStats {
  std::string name;
  std::size_t max_occupancy = 0;
  std::uint64_t full_stall_cycles = 0;
  /// Stall cycles during which the queue's consumer did no work either.
  std::uint64_t consumer_idle_stall_cycles = 0;
  friend bool operator==(const QueueStats &, const QueueStats &) = default;
};

struct SimReport {
  std::string model;
  ParallelismConfig config;
  std::uint64_t total_cycles = 0;
  std::vector<std::uint64_t> round_cycles;
  std::vector<UnitStats> nt_units;
  std::vector<UnitStats> mp_units;
  std::vector<QueueStats> queues;
  std::vector<std::size_t> bank_edges;
  double imbalance_percent = 0.0;
  std::vector<Scalar> prediction;
  std::size_t peak_message_scalars = 0;
  std::vector<TraceRecord> trace;

  friend bool operator==(const SimReport &, const SimReport &) = default;

  std::uint64_t mp_busy_total() const {
    std::uint64_t s = 0;
    for (const auto &u : mp_units)
      s += u.busy;
    return s;
  }
  std::uint64_t mp_idle_total() const {
    std::uint64_t s = 0;
    for (const auto &u : mp_units)
      s += u.idle;
    return s;
  }
};

namespace report_detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

template <typename T> std::string join(const std::vector<T> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += i ? ";" : "";
    if constexpr (std::is_floating_point_v<T>)
      s += io::format_scalar(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

} // namespace report_detail

/// Flat "key=value" document, one field per line, stable key order.
inline void write_text(std::ostream &os, const SimReport &r) {
  using namespace report_detail;
  const auto &c = r.config;
  os << "model=" << r.model << '\n'
     << "strategy=" << to_string(c.strategy) << '\n'
     << "p_node=" << c.p_node << '\n'
     << "p_edge=" << c.p_edge << '\n'
     << "p_apply=" << c.p_apply << '\n'
     << "p_scatter=" << c.p_scatter << '\n'
     << "queue_depth_beats=" << (c.queue_depth_beats == kUnboundedQueue ? std::string("unbounded")
                                                                         : std::to_string(c.queue_depth_beats))
     << '\n'
     << "layer_overhead_cycles=" << c.layer_overhead_cycles << '\n'
     << "total_cycles=" << r.total_cycles << '\n'
     << "round_cycles=" << join(r.round_cycles) << '\n';
  for (const auto &u : r.nt_units)
    os << u.name << ".busy=" << u.busy << '\n' << u.name << ".idle=" << u.idle << '\n';
  for (const auto &u : r.mp_units)
    os << u.name << ".busy=" << u.busy << '\n' << u.name << ".idle=" << u.idle << '\n';
  for (const auto &q : r.queues)
    os << q.name << ".max_occupancy=" << q.max_occupancy << '\n'
       << q.name << ".full_stall_cycles=" << q.full_stall_cycles << '\n'
       << q.name << ".consumer_idle_stall_cycles=" << q.consumer_idle_stall_cycles << '\n';
  os << "bank_edges=" << join(r.bank_edges) << '\n'
     << "imbalance_percent=" << fixed(r.imbalance_percent, 4) << '\n'
     << "peak_message_scalars=" << r.peak_message_scalars << '\n'
     << "prediction=" << join(r.prediction) << '\n';
}

inline std::string csv_header() {
  return "model,strategy,p_node,p_edge,p_apply,p_scatter,queue_depth_beats,total_cycles,nt_busy,mp_busy,"
         "max_queue_stall,imbalance_percent,peak_message_scalars";
}

inline std::string csv_row(const SimReport &r) {
  std::uint64_t nt = 0, stall = 0;
  for (const auto &u : r.nt_units)
    nt += u.busy;
  for (const auto &q : r.queues)
    stall = std::max(stall, q.full_stall_cycles);
  const auto &c = r.config;
  std::ostringstream os;
  os << r.model << ',' << to_string(c.strategy) << ',' << c.p_node << ',' << c.p_edge << ',' << c.p_apply << ','
     << c.p_scatter << ','
     << (c.queue_depth_beats == kUnboundedQueue ? std::string("unbounded") : std::to_string(c.queue_depth_beats))
     << ',' << r.total_cycles << ',' << nt << ',' << r.mp_busy_total() << ',' << stall << ','
     << report_detail::fixed(r.imbalance_percent, 4) << ',' << r.peak_message_scalars;
  return os.str();
}

/// "cycle,unit,event,id,detail" lines.
inline void write_trace(std::ostream &os, const SimReport &r) {
  os << "cycle,unit,event,id,detail\n";
  for (const auto &t : r.trace)
    os << t.cycle << ',' << t.unit << ',' << t.event << ',' << t.id << ',' << t.detail << '\n';
}

} // namespace flowgnn::sim

#endif
