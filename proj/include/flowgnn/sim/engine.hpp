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

#ifndef FLOWGNN_SIM_ENGINE_HPP
#define FLOWGNN_SIM_ENGINE_HPP

#include "flowgnn/kernels.hpp"
#include "flowgnn/partition.hpp"
#include "flowgnn/sim/buffers.hpp"
#include "flowgnn/sim/config.hpp"
#include "flowgnn/sim/report.hpp"

#include <deque>
#include <limits>

namespace flowgnn::sim {

struct SimOptions {
  bool trace = false;
};

namespace detail {

/// Round r runs the node transformation that ends layer r-1 and starts
/// layer r, followed by layer r's message passing. Rounds 0..L.
struct RoundPlan {
  std::size_t index = 0;
  NtCost nt;           ///< zero when the round has no costed linear
  bool has_mp = false; ///< false for the final round
  Dataflow dataflow = Dataflow::Scatter;
  std::size_t msg_dim = 0;
  std::size_t out_dim = 0;          ///< width of the NT output stream
  std::size_t chunks = 0;           ///< p_scatter chunks per message
  std::size_t gather_item_cost = 0; ///< per neighbour (self included) for gather rounds

  bool has_nt() const { return nt.total() > 0; }
};

inline std::vector<RoundPlan> plan_rounds(const std::vector<std::unique_ptr<LayerOps>> &ops, const Model &model,
                                          const ParallelismConfig &pc) {
  const std::size_t layers = ops.size();
  std::vector<RoundPlan> plans(layers + 1);
  for (std::size_t r = 0; r <= layers; ++r) {
    RoundPlan &p = plans[r];
    p.index = r;
    const LayerOps *post = r > 0 ? ops[r - 1].get() : nullptr;
    const LayerOps *pre = r < layers ? ops[r].get() : nullptr;
    if (pre && pre->linear_side() == LinearSide::Pre)
      p.nt = nt_unit_cost(pre->nt_acc_dim(), pre->nt_out_dim(), pc.p_apply);
    else if (post && post->linear_side() == LinearSide::Post)
      p.nt = nt_unit_cost(post->nt_acc_dim(), post->nt_out_dim(), pc.p_apply);
    p.out_dim = pre ? pre->msg_dim() : (post ? post->out_dim() : model.config.input_dim);
    if (pre) {
      p.has_mp = true;
      p.dataflow = pre->dataflow();
      p.msg_dim = pre->msg_dim();
      p.chunks = mp_unit_cost(p.msg_dim, pc.p_scatter);
      if (p.dataflow == Dataflow::Gather)
        p.gather_item_cost = mp_unit_cost(pre->score_dim(), pc.p_scatter) + p.chunks;
    }
  }
  return plans;
}

/// Real arithmetic, driven by the schedulers in event order. Uses the same
/// layer operations as run_model, so every destination sees its messages in
/// the same order and the results are bit-identical.
class Numerics {
public:
  Numerics(const GraphContext &ctx, const Model &model, const std::vector<std::unique_ptr<LayerOps>> &ops)
      : ctx_(ctx), model_(model), ops_(ops), x0_(initial_embeddings(*ctx.graph, model.config)),
        buffers_(ctx.graph->num_nodes(), max_state_width(ops)) {}

  const MessageBufferPair &buffers() const { return buffers_; }

  void begin_round(std::size_t r) {
    const std::size_t n = ctx_.graph->num_nodes();
    round_ = r;
    if (r > 0) {
      h_prev_ = std::move(h_cur_);
      buffers_.swap();
    }
    vn_ready_ = false;
    if (r < ops_.size()) {
      h_cur_ = Matrix(n, ops_[r]->msg_dim());
      for (NodeId i = 0; i < n; ++i)
        ops_[r]->init_state(buffers_.write_row(i, ops_[r]->state_dim()));
    } else {
      final_ = Matrix(n, r > 0 ? ops_[r - 1]->out_dim() : x0_.cols());
    }
  }

  void node_transform(NodeId i) {
    const std::size_t r = round_;
    const Graph &g = *ctx_.graph;
    std::span<const Scalar> xs;
    if (r == 0) {
      xs = x0_.row(i);
    } else {
      const LayerOps &post = *ops_[r - 1];
      scratch_.assign(post.out_dim(), 0.0f);
      post.post(i, h_prev_.row(i), buffers_.read_row(i, post.state_dim()), scratch_);
      xs = scratch_;
    }
    if (r == ops_.size()) {
      std::copy(xs.begin(), xs.end(), final_.row(i).begin());
      return;
    }
    const LayerOps &pre = *ops_[r];
    std::span<const Scalar> vn;
    if (pre.uses_virtual_node() && g.has_virtual_node()) {
      if (i == g.virtual_node()) {
        vn_x_.assign(xs.begin(), xs.end());
        vn_ready_ = true;
      } else if (!vn_ready_) {
        throw Error("internal: virtual node must be transformed before the nodes it feeds");
      }
      vn = vn_x_;
    }
    pre.pre(i, xs, vn, h_cur_.row(i));
  }

  void scatter(EdgeId k, NodeId src, NodeId dst, std::size_t lo, std::size_t hi) {
    const LayerOps &op = *ops_[round_];
    op.scatter(k, src, dst, h_cur_.row(src), buffers_.write_row(dst, op.state_dim()), lo, hi);
  }

  void gather(NodeId i) {
    const LayerOps &op = *ops_[round_];
    op.gather(i, h_cur_, buffers_.write_row(i, op.state_dim()));
  }

  std::vector<Scalar> prediction() const { return mlp_head(global_mean_pool(*ctx_.graph, final_), model_.head); }

private:
  static std::size_t max_state_width(const std::vector<std::unique_ptr<LayerOps>> &ops) {
    std::size_t w = 0;
    for (const auto &op : ops)
      w = std::max(w, op->state_dim());
    return w;
  }

  const GraphContext &ctx_;
  const Model &model_;
  const std::vector<std::unique_ptr<LayerOps>> &ops_;
  Matrix x0_, h_prev_, h_cur_, final_;
  MessageBufferPair buffers_;
  std::vector<Scalar> scratch_, vn_x_;
  bool vn_ready_ = false;
  std::size_t round_ = 0;
};

class Tracer {
public:
  Tracer(bool on, std::vector<TraceRecord> &out) : on_(on), out_(out) {}
  void set_base(std::uint64_t base) { base_ = base; }
  bool on() const { return on_; }
  void add(std::uint64_t t, std::string unit, std::string event, std::uint64_t id, std::string detail = {}) {
    if (on_)
      out_.push_back({base_ + t, std::move(unit), std::move(event), id, std::move(detail)});
  }

private:
  bool on_;
  std::vector<TraceRecord> &out_;
  std::uint64_t base_ = 0;
};

struct RoundResult {
  std::uint64_t cycles = 0;
  std::vector<std::uint64_t> nt_busy, mp_busy;
  std::vector<QueueStats> queues; ///< merged into the report by position
};

inline std::string unit_name(const char *kind, std::size_t i) { return kind + std::to_string(i); }

struct Shared {
  const GraphContext &ctx;
  Numerics &num;
  Tracer &tr;
  const ParallelismConfig &pc;
  std::vector<std::size_t> pos; ///< position of each node in processing order
};

inline std::uint64_t scatter_work(const Shared &s, const RoundPlan &p, NodeId v) {
  return static_cast<std::uint64_t>(s.ctx.csr.degree(v)) * p.chunks;
}

inline std::uint64_t gather_work(const Shared &s, const RoundPlan &p, NodeId v) {
  return static_cast<std::uint64_t>(s.ctx.csc.degree(v) + 1) * p.gather_item_cost;
}

inline void do_scatter(Shared &s, const RoundPlan &p, NodeId v) {
  const auto &csr = s.ctx.csr;
  for (std::size_t e = csr.begin(v); e < csr.end(v); ++e)
    s.num.scatter(csr.edge_perm[e], v, csr.col_idx[e], 0, p.msg_dim);
}

inline RoundResult make_result(std::size_t nt, std::size_t mp) {
  RoundResult r;
  r.nt_busy.assign(nt, 0);
  r.mp_busy.assign(mp, 0);
  return r;
}

/// Largest position in processing order among a node and its in-neighbours.
inline std::size_t last_dependency(const Shared &s, NodeId i) {
  std::size_t m = s.pos[i];
  for (std::size_t p = s.ctx.csc.begin(i); p < s.ctx.csc.end(i); ++p)
    m = std::max(m, s.pos[s.ctx.csc.col_idx[p]]);
  return m;
}

// (a) every node transformed, then every message passed.
inline RoundResult run_non_pipelined(Shared &s, const RoundPlan &p) {
  RoundResult res = make_result(1, 1);
  const std::uint64_t c = p.nt.total();
  std::uint64_t t = 0;
  for (NodeId v : s.ctx.order) {
    s.tr.add(t, "nt0", "nt_start", v);
    s.num.node_transform(v);
    t += c;
    s.tr.add(t, "nt0", "nt_done", v);
  }
  res.nt_busy[0] = t;
  if (p.has_mp) {
    for (NodeId v : s.ctx.order) {
      const std::uint64_t w = p.dataflow == Dataflow::Scatter ? scatter_work(s, p, v) : gather_work(s, p, v);
      if (w == 0)
        continue;
      s.tr.add(t, "mp0", "mp_start", v);
      if (p.dataflow == Dataflow::Scatter)
        do_scatter(s, p, v);
      else
        s.num.gather(v);
      t += w;
      res.mp_busy[0] += w;
      s.tr.add(t, "mp0", "mp_done", v);
    }
  }
  res.cycles = t;
  return res;
}

// (b) lockstep steps: NT of the next node alongside MP of the previous one.
inline RoundResult run_fixed_pipeline(Shared &s, const RoundPlan &p) {
  if (!p.has_mp)
    return run_non_pipelined(s, p);
  RoundResult res = make_result(1, 1);
  const auto &order = s.ctx.order;
  const std::size_t n = order.size();
  const std::uint64_t c = p.nt.total();
  std::uint64_t t = 0;
  auto nt = [&](std::size_t k) {
    s.tr.add(t, "nt0", "nt_start", order[k]);
    s.num.node_transform(order[k]);
    res.nt_busy[0] += c;
    s.tr.add(t + c, "nt0", "nt_done", order[k]);
  };
  if (p.dataflow == Dataflow::Scatter) {
    if (n > 0) {
      nt(0);
      t += c;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const bool nt_active = k + 1 < n;
      if (nt_active)
        nt(k + 1);
      const std::uint64_t w = scatter_work(s, p, order[k]);
      if (w > 0) {
        s.tr.add(t, "mp0", "mp_start", order[k]);
        do_scatter(s, p, order[k]);
        s.tr.add(t + w, "mp0", "mp_done", order[k]);
      }
      res.mp_busy[0] += w;
      t += std::max(nt_active ? c : 0, w);
    }
  } else {
    // MP takes the next destination at a step boundary only once the node and
    // all of its in-neighbours have been transformed.
    std::size_t next_nt = 0, next_mp = 0;
    while (next_nt < n || next_mp < n) {
      std::uint64_t dur = 0;
      const std::size_t step = next_nt;
      if (next_mp < n && last_dependency(s, order[next_mp]) < step) {
        const NodeId v = order[next_mp++];
        const std::uint64_t w = gather_work(s, p, v);
        s.tr.add(t, "mp0", "mp_start", v);
        s.num.gather(v);
        s.tr.add(t + w, "mp0", "mp_done", v);
        res.mp_busy[0] += w;
        dur = w;
      }
      if (next_nt < n) {
        nt(next_nt++);
        dur = std::max(dur, c);
      }
      t += dur;
    }
  }
  res.cycles = t;
  return res;
}

// (c) free-running NT feeding MP through a bounded node queue.
inline RoundResult run_baseline_dataflow(Shared &s, const RoundPlan &p) {
  if (!p.has_mp)
    return run_non_pipelined(s, p);
  RoundResult res = make_result(1, 1);
  const auto &order = s.ctx.order;
  const std::size_t n = order.size();
  const std::uint64_t c = p.nt.total();
  if (p.dataflow == Dataflow::Gather) {
    std::vector<std::uint64_t> done(n);
    for (std::size_t k = 0; k < n; ++k) {
      s.tr.add(k * c, "nt0", "nt_start", order[k]);
      s.num.node_transform(order[k]);
      done[k] = (k + 1) * c;
      s.tr.add(done[k], "nt0", "nt_done", order[k]);
    }
    res.nt_busy[0] = n * c;
    std::uint64_t end = n * c, mp_free = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const NodeId v = order[k];
      const std::uint64_t start = std::max(done[last_dependency(s, v)], mp_free);
      const std::uint64_t w = gather_work(s, p, v);
      s.tr.add(start, "mp0", "mp_start", v);
      s.num.gather(v);
      mp_free = start + w;
      s.tr.add(mp_free, "mp0", "mp_done", v);
      res.mp_busy[0] += w;
      end = std::max(end, mp_free);
    }
    res.cycles = end;
    return res;
  }
  const std::size_t depth = s.pc.queue_depth_beats;
  const std::size_t cap = depth == kUnboundedQueue ? std::max<std::size_t>(n, 1)
                                                   : std::max<std::size_t>(1, depth / p.chunks);
  std::vector<std::uint64_t> push(n), start(n);
  QueueStats q{"node_queue", 0, 0};
  std::uint64_t nt_free = 0, mp_free = 0, end = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const NodeId v = order[k];
    s.tr.add(nt_free, "nt0", "nt_start", v);
    s.num.node_transform(v);
    const std::uint64_t finished = nt_free + c;
    // a queue slot frees when MP pops node k - cap
    push[k] = k >= cap ? std::max(finished, start[k - cap]) : finished;
    if (push[k] > finished) {
      q.full_stall_cycles += push[k] - finished;
      s.tr.add(finished, "nt0", "stall", v, "node_queue");
    }
    s.tr.add(push[k], "nt0", "nt_done", v);
    nt_free = push[k];
    start[k] = std::max(push[k], mp_free);
    const std::uint64_t w = scatter_work(s, p, v);
    if (w > 0) {
      s.tr.add(start[k], "mp0", "mp_start", v);
      do_scatter(s, p, v);
      s.tr.add(start[k] + w, "mp0", "mp_done", v);
    }
    mp_free = start[k] + w;
    res.mp_busy[0] += w;
    end = std::max(end, mp_free);
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t occ = 1;
    for (std::size_t j = k >= cap ? k - cap : 0; j < k; ++j)
      occ += start[j] > push[k];
    q.max_occupancy = std::max(q.max_occupancy, occ);
  }
  res.nt_busy[0] = n * c;
  res.cycles = std::max(end, nt_free);
  res.queues.push_back(q);
  return res;
}

// (d) p_node NT units with ping-pong accumulate/output, beat streaming through
// the adapter into per-(NT, MP) queues, p_edge MP units owning destination banks.
class MultiQueueRound {
public:
  MultiQueueRound(Shared &s, const RoundPlan &p, const EdgeBankAssignment &banks)
      : s_(s), p_(p), banks_(banks), nt_count_(s.pc.p_node), mp_count_(s.pc.p_edge) {}

  RoundResult run() {
    RoundResult res = make_result(nt_count_, mp_count_);
    const auto &order = s_.ctx.order;
    const std::size_t n = order.size();
    const bool scatter = p_.has_mp && p_.dataflow == Dataflow::Scatter;
    streaming_ = scatter && p_.has_nt();

    nt_.assign(nt_count_, NtUnit{});
    if (p_.has_nt())
      for (std::size_t k = 0; k < n; ++k)
        nt_[k % nt_count_].nodes.push_back(order[k]);
    done_.assign(s_.ctx.graph->num_nodes(), p_.has_nt() ? kNever : 0);
    if (!p_.has_nt())
      for (NodeId v : order)
        s_.num.node_transform(v);

    mp_.assign(mp_count_, MpUnit{});
    if (p_.has_mp) {
      const auto &csr = s_.ctx.csr;
      for (NodeId v : order) {
        if (scatter) {
          std::vector<std::vector<std::size_t>> per_bank(mp_count_);
          for (std::size_t e = csr.begin(v); e < csr.end(v); ++e)
            per_bank[banks_.bank_of_dst(csr.col_idx[e])].push_back(e);
          for (std::size_t q = 0; q < mp_count_; ++q)
            if (!per_bank[q].empty()) {
              mp_[q].nodes.push_back(v);
              mp_[q].edges.push_back(std::move(per_bank[q]));
            }
        } else {
          mp_[banks_.bank_of_dst(v)].nodes.push_back(v);
        }
      }
    }
    if (streaming_) {
      routes_.resize(s_.ctx.graph->num_nodes());
      for (NodeId v : order)
        routes_[v] = adapter_route(v, s_.ctx.csr, banks_);
      queues_.assign(nt_count_ * mp_count_, {});
      qstats_.assign(nt_count_ * mp_count_, {});
      for (std::size_t u = 0; u < nt_count_; ++u)
        for (std::size_t q = 0; q < mp_count_; ++q)
          qstats_[u * mp_count_ + q].name = "queue_nt" + std::to_string(u) + "_mp" + std::to_string(q);
      blocked_.assign(mp_count_, false);
    }

    if (!p_.has_nt() && !p_.has_mp) {
      res.cycles = 0;
      return res;
    }
    std::uint64_t t = 0, last_progress = 0;
    const std::uint64_t watchdog = 4 * (p_.nt.total() + 1) * (p_.chunks + 1) + 1024;
    mp_worked_.assign(mp_count_, false);
    while (!all_done()) {
      bool progress = false;
      stall_log_.clear();
      for (std::size_t u = 0; u < nt_count_; ++u)
        progress |= step_nt(u, t, res.nt_busy[u]);
      for (std::size_t q = 0; q < mp_count_; ++q)
        progress |= (mp_worked_[q] = step_mp(q, t, res.mp_busy[q]));
      for (std::size_t i : stall_log_)
        if (!mp_worked_[i % mp_count_])
          ++qstats_[i].consumer_idle_stall_cycles;
      ++t;
      if (progress)
        last_progress = t;
      else if (t - last_progress > watchdog)
        throw Error("simulation made no progress for " + std::to_string(watchdog) + " cycles (deadlock)");
    }
    res.cycles = t;
    if (streaming_)
      res.queues = qstats_;
    return res;
  }

private:
  static constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

  struct Chunk {
    NodeId node;
    std::size_t lo, hi;
    std::uint64_t visible;
  };
  struct Pending {
    NodeId node;
    std::size_t lo, hi;
    std::vector<std::size_t> dests; ///< queues still to receive this chunk
  };
  struct NtUnit {
    std::vector<NodeId> nodes;
    std::size_t next_acc = 0;
    bool acc_active = false;
    NodeId acc_node = 0;
    std::size_t acc_left = 0;
    std::deque<NodeId> ready;
    bool out_active = false;
    NodeId out_node = 0;
    std::size_t out_elems = 0, chunk_lo = 0;
    std::size_t buffers_used = 0;
    std::deque<Pending> pending;

    bool done() const {
      return next_acc == nodes.size() && !acc_active && ready.empty() && !out_active && pending.empty();
    }
  };
  struct MpUnit {
    std::vector<NodeId> nodes;
    std::vector<std::vector<std::size_t>> edges; ///< CSR positions per node (scatter)
    std::size_t idx = 0, chunk = 0;
    std::uint64_t busy_left = 0;

    bool done() const { return idx == nodes.size() && busy_left == 0; }
  };

  bool all_done() const {
    for (const auto &u : nt_)
      if (!u.done())
        return false;
    for (const auto &m : mp_)
      if (!m.done())
        return false;
    return true;
  }

  /// Pushes pending chunks in FIFO order per destination queue. Returns true
  /// if anything moved; blocked_ marks queues that refused a chunk.
  bool flush(std::size_t u, std::uint64_t t) {
    NtUnit &U = nt_[u];
    std::fill(blocked_.begin(), blocked_.end(), false);
    bool moved = false;
    for (auto it = U.pending.begin(); it != U.pending.end();) {
      auto &dests = it->dests;
      for (auto d = dests.begin(); d != dests.end();) {
        const std::size_t q = *d;
        auto &queue = queues_[u * mp_count_ + q];
        if (!blocked_[q] && queue.size() < s_.pc.queue_depth_beats) {
          queue.push_back({it->node, it->lo, it->hi, t + 1});
          auto &st = qstats_[u * mp_count_ + q];
          st.max_occupancy = std::max(st.max_occupancy, queue.size());
          d = dests.erase(d);
          moved = true;
        } else {
          blocked_[q] = true;
          ++d;
        }
      }
      it = dests.empty() ? U.pending.erase(it) : std::next(it);
    }
    return moved;
  }

  bool step_nt(std::size_t u, std::uint64_t t, std::uint64_t &busy_cycles) {
    NtUnit &U = nt_[u];
    if (U.done())
      return false;
    const std::string name = unit_name("nt", u);
    bool busy = false, moved = false;
    if (!U.acc_active && U.next_acc < U.nodes.size() && U.buffers_used < 2) {
      U.acc_node = U.nodes[U.next_acc++];
      s_.num.node_transform(U.acc_node);
      U.acc_active = true;
      U.acc_left = p_.nt.accumulate;
      ++U.buffers_used;
      s_.tr.add(t, name, "acc_start", U.acc_node);
    }
    if (streaming_ && !U.pending.empty())
      moved |= flush(u, t);
    if (!U.out_active && !U.ready.empty()) {
      U.out_node = U.ready.front();
      U.ready.pop_front();
      U.out_active = true;
      U.out_elems = 0;
      U.chunk_lo = 0;
      s_.tr.add(t, name, "out_start", U.out_node);
    }
    if (U.out_active) {
      if (U.pending.empty()) {
        busy = true;
        U.out_elems = std::min(p_.out_dim, U.out_elems + s_.pc.p_apply);
        const bool last = U.out_elems == p_.out_dim;
        if (streaming_) {
          const auto &route = routes_[U.out_node];
          while (U.chunk_lo < U.out_elems && (U.out_elems - U.chunk_lo >= s_.pc.p_scatter || last)) {
            const std::size_t hi = std::min(U.chunk_lo + s_.pc.p_scatter, p_.out_dim);
            if (!route.empty())
              U.pending.push_back({U.out_node, U.chunk_lo, hi, route});
            U.chunk_lo = hi;
          }
          flush(u, t);
        }
        if (last) {
          U.out_active = false;
          --U.buffers_used;
          done_[U.out_node] = t + 1;
          s_.tr.add(t + 1, name, "nt_done", U.out_node);
        }
      } else {
        for (std::size_t q = 0; q < mp_count_; ++q)
          if (blocked_[q]) {
            ++qstats_[u * mp_count_ + q].full_stall_cycles;
            stall_log_.push_back(u * mp_count_ + q);
          }
        s_.tr.add(t, name, "stall", U.out_node);
      }
    }
    if (U.acc_active) {
      busy = true;
      if (--U.acc_left == 0) {
        U.acc_active = false;
        U.ready.push_back(U.acc_node);
      }
    }
    if (busy)
      ++busy_cycles;
    return busy || moved;
  }

  bool step_mp(std::size_t q, std::uint64_t t, std::uint64_t &busy_cycles) {
    MpUnit &M = mp_[q];
    bool popped = false;
    if (M.busy_left == 0 && M.idx < M.nodes.size()) {
      const NodeId v = M.nodes[M.idx];
      const std::string name = unit_name("mp", q);
      if (p_.dataflow == Dataflow::Scatter) {
        std::size_t lo = M.chunk * s_.pc.p_scatter, hi = std::min(lo + s_.pc.p_scatter, p_.msg_dim);
        bool got = !streaming_;
        if (streaming_) {
          auto &queue = queues_[(s_.pos[v] % nt_count_) * mp_count_ + q];
          if (!queue.empty() && queue.front().visible <= t) {
            const Chunk &c = queue.front();
            if (c.node != v || c.lo != lo || c.hi != hi)
              throw Error("internal: MP unit received an out-of-order chunk");
            queue.pop_front();
            got = true;
          }
        }
        if (got) {
          popped = true;
          const auto &csr = s_.ctx.csr;
          for (std::size_t e : M.edges[M.idx])
            s_.num.scatter(csr.edge_perm[e], v, csr.col_idx[e], lo, hi);
          M.busy_left = M.edges[M.idx].size();
          if (s_.tr.on())
            s_.tr.add(t, name, "scatter", v, std::to_string(lo) + ":" + std::to_string(hi));
          if (++M.chunk == p_.chunks) {
            M.chunk = 0;
            ++M.idx;
          }
        }
      } else {
        bool ready = done_[v] <= t;
        const auto &csc = s_.ctx.csc;
        for (std::size_t e = csc.begin(v); ready && e < csc.end(v); ++e)
          ready = done_[csc.col_idx[e]] <= t;
        if (ready) {
          popped = true;
          s_.num.gather(v);
          M.busy_left = gather_work(s_, p_, v);
          s_.tr.add(t, name, "gather", v);
          ++M.idx;
        }
      }
    }
    if (M.busy_left > 0) {
      --M.busy_left;
      ++busy_cycles;
      return true;
    }
    return popped;
  }

  Shared &s_;
  const RoundPlan &p_;
  const EdgeBankAssignment &banks_;
  std::size_t nt_count_, mp_count_;
  bool streaming_ = false;
  std::vector<NtUnit> nt_;
  std::vector<MpUnit> mp_;
  std::vector<std::uint64_t> done_;
  std::vector<std::vector<std::size_t>> routes_;
  std::vector<std::deque<Chunk>> queues_;
  std::vector<QueueStats> qstats_;
  std::vector<bool> blocked_, mp_worked_;
  std::vector<std::size_t> stall_log_;
};

} // namespace detail

/// Cycle-level simulation of the accelerator executing `model` on `g`.
/// Returns cycle counts, utilisation and the prediction computed through the
/// simulated schedule.
inline SimReport simulate(const Graph &g, const Model &model, const ParallelismConfig &pc,
                          const SimOptions &opt = {}) {
  pc.validate();
  model.validate();
  check_compatible(g, model.config);
  GraphContext ctx(g);
  std::vector<std::unique_ptr<LayerOps>> ops;
  for (std::size_t l = 0; l < model.config.num_layers; ++l)
    ops.push_back(make_layer_ops(ctx, model, l));
  const auto plans = detail::plan_rounds(ops, model, pc);

  SimReport rep;
  rep.model = model.config.name();
  rep.config = pc;
  const std::size_t nt_units = pc.nt_units(), mp_units = pc.mp_units();
  const auto banks = partition_edges(g, mp_units);
  rep.bank_edges = banks.per_bank_edge_count();
  rep.imbalance_percent = mp_units >= 2 && g.num_edges() > 0 ? workload_imbalance(g, mp_units) : 0.0;

  detail::Numerics num(ctx, model, ops);
  detail::Tracer tr(opt.trace, rep.trace);
  detail::Shared shared{ctx, num, tr, pc, std::vector<std::size_t>(g.num_nodes())};
  for (std::size_t k = 0; k < ctx.order.size(); ++k)
    shared.pos[ctx.order[k]] = k;

  std::vector<std::uint64_t> nt_busy(nt_units, 0), mp_busy(mp_units, 0);
  std::uint64_t total = 0;
  for (const auto &plan : plans) {
    num.begin_round(plan.index);
    tr.set_base(total);
    tr.add(0, "sim", "round_start", plan.index);
    detail::RoundResult rr;
    switch (pc.strategy) {
    case PipelineStrategy::NonPipelined: rr = detail::run_non_pipelined(shared, plan); break;
    case PipelineStrategy::FixedPipeline: rr = detail::run_fixed_pipeline(shared, plan); break;
    case PipelineStrategy::BaselineDataflow: rr = detail::run_baseline_dataflow(shared, plan); break;
    case PipelineStrategy::MultiQueueDataflow: rr = detail::MultiQueueRound(shared, plan, banks).run(); break;
    }
    rep.round_cycles.push_back(rr.cycles);
    total += rr.cycles;
    for (std::size_t u = 0; u < nt_units; ++u)
      nt_busy[u] += rr.nt_busy[u];
    for (std::size_t q = 0; q < mp_units; ++q)
      mp_busy[q] += rr.mp_busy[q];
    if (rep.queues.empty()) {
      rep.queues = rr.queues;
    } else {
      for (std::size_t i = 0; i < rr.queues.size(); ++i) {
        rep.queues[i].max_occupancy = std::max(rep.queues[i].max_occupancy, rr.queues[i].max_occupancy);
        rep.queues[i].full_stall_cycles += rr.queues[i].full_stall_cycles;
        rep.queues[i].consumer_idle_stall_cycles += rr.queues[i].consumer_idle_stall_cycles;
      }
    }
  }
  total += model.config.num_layers * pc.layer_overhead_cycles;
  rep.total_cycles = total;
  for (std::size_t u = 0; u < nt_units; ++u)
    rep.nt_units.push_back({detail::unit_name("nt", u), nt_busy[u], total - nt_busy[u]});
  for (std::size_t q = 0; q < mp_units; ++q)
    rep.mp_units.push_back({detail::unit_name("mp", q), mp_busy[q], total - mp_busy[q]});
  rep.prediction = num.prediction();
  rep.peak_message_scalars = num.buffers().peak_scalars();
  return rep;
}

} // namespace flowgnn::sim

#endif
