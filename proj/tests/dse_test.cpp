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

#include "test_util.hpp"

#include "flowgnn/dse.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

using namespace flowgnn;
using namespace flowgnn::testing;
using S = sim::PipelineStrategy;

namespace {

Graph uniform(std::size_t n, double deg, std::uint64_t seed, std::size_t f = 16) {
  SyntheticSpec s;
  s.num_nodes = n;
  s.avg_degree = deg;
  s.feature_dim = f;
  s.seed = seed;
  return gen_synthetic(s);
}

Model gcn(std::size_t in, std::size_t layers, std::size_t hidden) {
  ModelConfig c = preset("gcn", in, 0);
  c.num_layers = layers;
  c.hidden_dim = hidden;
  return random_model(c, 0);
}

dse::Bottleneck tag_of(const Graph &g, const Model &m, const sim::ParallelismConfig &pc) {
  return dse::bottleneck_report(sim::simulate(g, m, pc)).tag;
}

} // namespace

TEST(Bottleneck, FewTransformUnitsManyMessageUnitsIsNtBound) {
  const Graph g = uniform(64, 8, 1);
  EXPECT_EQ(tag_of(g, gcn(16, 2, 100), {1, 8, 1, 8, 16, S::MultiQueueDataflow, 0}), dse::Bottleneck::NtBound);
}

TEST(Bottleneck, StarWithManyTransformUnitsIsMpBound) {
  std::vector<Edge> coo;
  for (NodeId i = 1; i < 40; ++i) {
    coo.push_back({0, i});
    coo.push_back({i, 0});
  }
  const Graph star(40, coo, Matrix(40, 16, 0.5f));
  EXPECT_EQ(tag_of(star, gcn(16, 2, 100), {4, 1, 8, 1, 16, S::MultiQueueDataflow, 0}), dse::Bottleneck::MpBound);
}

TEST(Bottleneck, DepthOneQueuesCanBeQueueBound) {
  const Graph g = uniform(64, 8, 1);
  EXPECT_EQ(tag_of(g, gcn(16, 2, 100), {4, 4, 1, 1, 1, S::MultiQueueDataflow, 0}), dse::Bottleneck::QueueBound);
}

TEST(Bottleneck, UtilizationTableCoversAllUnits) {
  const Graph g = uniform(20, 3, 2);
  const auto r = sim::simulate(g, gcn(16, 2, 32), {2, 3, 1, 1, 16, S::MultiQueueDataflow, 0});
  const auto rep = dse::bottleneck_report(r);
  EXPECT_EQ(rep.units.size(), 5u);
  for (const auto &u : rep.units) {
    EXPECT_GE(u.utilization, 0.0);
    EXPECT_LE(u.utilization, 1.0);
  }
}

TEST(Sweep, TrivialGridIsBaseline) {
  dse::SweepSpec spec;
  spec.p_node = spec.p_edge = spec.p_apply = spec.p_scatter = {1};
  const auto res = dse::run_sweep(spec, {uniform(20, 3, 1)}, gcn(16, 2, 32));
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.baseline_row, 0u);
  EXPECT_EQ(res.rows[0].speedup, 1.0);
}

TEST(Sweep, BaselineMustBeInGrid) {
  dse::SweepSpec spec;
  spec.p_node = {2, 4};
  EXPECT_THROW(dse::run_sweep(spec, {uniform(10, 2, 1)}, gcn(16, 1, 8)), ConfigError);
  spec.p_node = {};
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Sweep, FullGridShapeSpeedupAndMonotonicity) {
  std::vector<Graph> graphs;
  for (std::uint64_t s = 0; s < 4; ++s)
    graphs.push_back(uniform(30, 3, s, 64));
  const Model m = gcn(64, 2, 64);
  dse::SweepSpec spec;
  spec.queue_depth_beats = sim::kUnboundedQueue;
  spec.baseline.queue_depth_beats = sim::kUnboundedQueue;
  spec.threads = 2;
  const auto res = dse::run_sweep(spec, graphs, m);
  ASSERT_EQ(res.rows.size(), 108u);
  EXPECT_EQ(res.rows[res.baseline_row].speedup, 1.0);
  double best = 0.0;
  std::map<std::array<std::size_t, 4>, double> by_key;
  for (const auto &row : res.rows) {
    EXPECT_FALSE(row.failed) << row.error;
    best = std::max(best, row.speedup);
    by_key[{row.config.p_node, row.config.p_edge, row.config.p_apply, row.config.p_scatter}] = row.cycles_geomean;
  }
  EXPECT_GE(best, 2.0);
  for (const auto &[k, v] : by_key)
    for (std::size_t d = 0; d < 4; ++d) {
      auto up = k;
      up[d] *= 2;
      if (auto it = by_key.find(up); it != by_key.end()) {
        EXPECT_LE(it->second, v * (1 + 1e-12));
      }
    }
}

TEST(Sweep, RowsAreOrderedAndThreadCountIndependent) {
  const std::vector<Graph> graphs{uniform(16, 3, 1), uniform(24, 2, 2)};
  const Model m = gcn(16, 1, 16);
  dse::SweepSpec spec;
  spec.p_node = {2, 1};
  spec.p_edge = {1, 2};
  spec.p_apply = {1};
  spec.p_scatter = {4, 1};
  std::ostringstream one, many;
  dse::write_sweep_csv(one, dse::run_sweep(spec, graphs, m));
  spec.threads = 3;
  dse::write_sweep_csv(many, dse::run_sweep(spec, graphs, m));
  EXPECT_EQ(one.str(), many.str());
  const auto res = dse::run_sweep(spec, graphs, m);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const auto &a = res.rows[i - 1].config, &b = res.rows[i].config;
    EXPECT_LT(std::tie(a.p_node, a.p_edge, a.p_apply, a.p_scatter), std::tie(b.p_node, b.p_edge, b.p_apply, b.p_scatter));
  }
}

TEST(Sweep, SpeedupsAreScaleFree) {
  // widening every dimension by 4 scales every per-unit cost by 4 at p = 1
  dse::SweepSpec spec;
  spec.p_node = spec.p_edge = {1, 2};
  spec.p_apply = spec.p_scatter = {1};
  spec.queue_depth_beats = spec.baseline.queue_depth_beats = sim::kUnboundedQueue;
  const auto small = dse::run_sweep(spec, {uniform(16, 3, 5, 8)}, gcn(8, 1, 8));
  const auto large = dse::run_sweep(spec, {uniform(16, 3, 5, 32)}, gcn(32, 1, 32));
  for (std::size_t i = 0; i < small.rows.size(); ++i)
    EXPECT_NEAR(small.rows[i].speedup, large.rows[i].speedup, 0.05);
}

TEST(Means, GeometricAndArithmetic) {
  EXPECT_DOUBLE_EQ(dse::geomean({4, 9}), 6.0);
  EXPECT_DOUBLE_EQ(dse::mean({4, 9}), 6.5);
}

TEST(Ablation, SingleNodeRatiosAreOne) {
  const Graph g(1, {}, Matrix(1, 9, 0.25f));
  const auto rows = dse::ablation({g}, random_model(preset("gcn", 9, 0), 0));
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_EQ(rows[i].speedup_vs_first, 1.0) << rows[i].label;
}

TEST(Ablation, LadderIsOrdered) {
  std::vector<Graph> graphs;
  for (std::uint64_t s = 0; s < 6; ++s) {
    SyntheticSpec spec;
    spec.num_nodes = 15 + 5 * s;
    spec.avg_degree = 2.2;
    spec.feature_dim = 9;
    spec.seed = s;
    graphs.push_back(gen_synthetic(spec));
  }
  const auto rows = dse::ablation(graphs, random_model(preset("gcn", 9, 0), 0));
  EXPECT_EQ(rows[0].label, "non-pipelined");
  EXPECT_EQ(rows[3].label, "multiqueue-1-1");
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_GE(rows[i].speedup_vs_previous, 1.0) << rows[i].label;
  std::ostringstream os;
  dse::write_ablation_csv(os, rows);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}
