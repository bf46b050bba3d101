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

#include "flowgnn/aggregate.hpp"
#include "flowgnn/graph_io.hpp"
#include "flowgnn/kernels.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

using namespace flowgnn;
using namespace flowgnn::testing;

namespace {

Linear zero_linear(std::size_t out, std::size_t in, bool bias) {
  Linear l;
  l.weight = Matrix(out, in);
  if (bias)
    l.bias.assign(out, 0.0f);
  return l;
}

Linear with_bias(Linear l) {
  l.bias.assign(l.out_dim(), 0.0f);
  return l;
}

/// One-layer model with every parameter zero (or identity where noted) and a
/// single-output head, to be filled in by each test.
Model blank_model(ModelKind kind, std::size_t in, std::size_t hidden) {
  Model m;
  m.config.kind = kind;
  m.config.num_layers = 1;
  m.config.input_dim = in;
  m.config.hidden_dim = hidden;
  m.config.head_dims = {1};
  if (kind == ModelKind::GAT) {
    m.config.gat_heads = 1;
    m.config.gat_head_dim = hidden;
  }
  LayerParams p;
  switch (kind) {
  case ModelKind::GCN:
  case ModelKind::GAT: p.linear = zero_linear(hidden, in, false); break;
  case ModelKind::GIN:
    p.mlp0 = zero_linear(hidden, in, true);
    p.mlp1 = zero_linear(hidden, hidden, true);
    break;
  case ModelKind::PNA: p.linear = zero_linear(hidden, 12 * in, true); break;
  case ModelKind::DGN: p.linear = zero_linear(hidden, 2 * in, true); break;
  }
  p.att_target = Matrix(m.config.gat_heads, m.config.gat_head_dim);
  p.att_neighbor = Matrix(m.config.gat_heads, m.config.gat_head_dim);
  m.layers.push_back(p);
  m.head.push_back(zero_linear(1, hidden, true));
  return m;
}

EmbeddingBuffer features_of(const Graph &g) { return {g.node_features(), 0}; }

std::vector<Scalar> row_of(const Matrix &m, std::size_t r) {
  auto s = m.row(r);
  return {s.begin(), s.end()};
}

Graph permuted(const Graph &g, const std::vector<NodeId> &perm, const std::vector<std::size_t> &edge_order) {
  const std::size_t n = g.num_nodes();
  Matrix x(n, g.feature_dim());
  for (NodeId v = 0; v < n; ++v)
    std::copy(g.node_features().row(v).begin(), g.node_features().row(v).end(), x.row(perm[v]).begin());
  std::vector<Edge> coo;
  Matrix ef(g.has_edge_features() ? g.num_edges() : 0, g.edge_dim());
  for (std::size_t k = 0; k < edge_order.size(); ++k) {
    const Edge &e = g.edge(static_cast<EdgeId>(edge_order[k]));
    coo.push_back({perm[e.src], perm[e.dst]});
    if (g.has_edge_features())
      std::copy(g.edge_features().row(edge_order[k]).begin(), g.edge_features().row(edge_order[k]).end(),
                ef.row(k).begin());
  }
  std::vector<Scalar> field;
  if (g.has_node_field()) {
    field.resize(n);
    for (NodeId v = 0; v < n; ++v)
      field[perm[v]] = g.node_field()[v];
  }
  return Graph(n, std::move(coo), std::move(x), std::move(ef), std::move(field), g.has_virtual_node());
}

} // namespace

TEST(Aggregate, Sum) {
  EXPECT_EQ(aggregate(rows({{1}, {2}, {3}}), AggregatorKind::Sum), (std::vector<Scalar>{6}));
}

TEST(Aggregate, MeanMaxMin) {
  const Matrix v = rows({{1, -4}, {3, 2}});
  EXPECT_EQ(aggregate(v, AggregatorKind::Mean), (std::vector<Scalar>{2, -1}));
  EXPECT_EQ(aggregate(v, AggregatorKind::Max), (std::vector<Scalar>{3, 2}));
  EXPECT_EQ(aggregate(v, AggregatorKind::Min), (std::vector<Scalar>{1, -4}));
}

TEST(Aggregate, StdOfConstantIsEpsilonFloor) {
  const auto s = aggregate(rows({{2}, {2}, {2}}), AggregatorKind::Std);
  EXPECT_NEAR(s[0], std::sqrt(1e-5), 1e-6);
  EXPECT_NEAR(s[0], 0.00316, 1e-5);
}

TEST(Aggregate, StdMatchesDefinition) {
  const auto s = aggregate(rows({{1}, {3}}), AggregatorKind::Std);
  EXPECT_NEAR(s[0], std::sqrt(1.0 + 1e-5), 1e-6);
}

TEST(Aggregate, EmptyInputIsZeroForEveryKind) {
  for (auto kind : {AggregatorKind::Sum, AggregatorKind::Mean, AggregatorKind::Max, AggregatorKind::Min,
                    AggregatorKind::Std})
    EXPECT_EQ(aggregate(Matrix(0, 3), kind), (std::vector<Scalar>(3, 0.0f)));
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(5);
  Matrix v(7, 4);
  for (auto &x : v.data())
    x = static_cast<Scalar>(static_cast<int>(rng.below(17)) - 8) / 4.0f; // exact in float
  Matrix r(7, 4);
  const std::size_t perm[7] = {3, 6, 0, 5, 1, 4, 2};
  for (std::size_t i = 0; i < 7; ++i)
    std::copy(v.row(i).begin(), v.row(i).end(), r.row(perm[i]).begin());
  for (auto kind : {AggregatorKind::Sum, AggregatorKind::Mean, AggregatorKind::Max, AggregatorKind::Min,
                    AggregatorKind::Std})
    EXPECT_EQ(aggregate(v, kind), aggregate(r, kind));
}

TEST(Aggregate, ParseNames) {
  EXPECT_EQ(parse_aggregator("std"), AggregatorKind::Std);
  EXPECT_THROW(parse_aggregator("median"), ConfigError);
}

TEST(GinLayer, IsolatedNodeIsMlpOfSelf) {
  const Graph g(1, {}, rows({{0.3f, -0.8f, 0.5f}}));
  ModelConfig c;
  c.kind = ModelKind::GIN;
  c.num_layers = 1;
  c.input_dim = 3;
  c.hidden_dim = 4;
  const Model m = random_model(c, 9);
  const auto out = gin_layer(g, features_of(g), m, 0);
  std::vector<Scalar> expect(4);
  apply_mlp(m.layers[0].mlp0, m.layers[0].mlp1, g.node_features().row(0), expect);
  EXPECT_EQ(row_of(out.values, 0), expect);
  EXPECT_EQ(out.layer, 1u);
}

TEST(GinLayer, TwoNodeHandCase) {
  const Graph g(2, {{1, 0}}, rows({{0.5f, 2.0f}, {-1.0f, 3.0f}}));
  Model m = blank_model(ModelKind::GIN, 2, 2);
  m.layers[0].mlp0 = with_bias(identity(2));
  m.layers[0].mlp1 = with_bias(identity(2));
  const auto out = gin_layer(g, features_of(g), m, 0);
  // x0' = x0 + ReLU(x1); node 1 has no in-edges
  EXPECT_EQ(row_of(out.values, 0), (std::vector<Scalar>{0.5f, 5.0f}));
  EXPECT_EQ(row_of(out.values, 1), (std::vector<Scalar>{0.0f, 3.0f}));
}

TEST(GinLayer, EpsilonScalesSelfTerm) {
  const Graph g(1, {}, rows({{0.5f, 2.0f}}));
  Model m = blank_model(ModelKind::GIN, 2, 2);
  m.config.gin_epsilon = {0.5f};
  m.layers[0].epsilon = 0.5f;
  m.layers[0].mlp0 = with_bias(identity(2));
  m.layers[0].mlp1 = with_bias(identity(2));
  EXPECT_EQ(row_of(gin_layer(g, features_of(g), m, 0).values, 0), (std::vector<Scalar>{0.75f, 3.0f}));
}

TEST(GinLayer, EdgeFeaturesChangeMessagesOnPath) {
  SyntheticSpec s;
  s.num_nodes = 6;
  s.avg_degree = 0;
  s.feature_dim = 4;
  s.edge_dim = 2;
  std::vector<Edge> coo;
  for (NodeId i = 0; i + 1 < 6; ++i)
    coo.push_back({i, i + 1});
  const Graph base = gen_synthetic(s);
  Matrix ef_a(coo.size(), 2, 0.25f), ef_b(coo.size(), 2, -0.75f);
  const Graph a(6, coo, base.node_features(), ef_a), b(6, coo, base.node_features(), ef_b);
  ModelConfig c = preset("gin", 4, 2);
  c.num_layers = 2;
  c.hidden_dim = 8;
  const Model m = random_model(c, 1);
  EXPECT_GT(max_abs_diff(run_model(a, m), run_model(b, m)), 1e-6);
}

TEST(GinLayer, ZeroEdgeFeaturesWithUnbiasedEncoderMatchNoEncoder) {
  const Graph plain = graph_for("gin", 12, 3, 4, 5, 0);
  const Graph zeros(plain.num_nodes(), plain.coo(), plain.node_features(), Matrix(plain.num_edges(), 3));
  ModelConfig c0 = preset("gin", 5, 0), c3 = preset("gin", 5, 3);
  c0.num_layers = c3.num_layers = 2;
  Model m3 = random_model(c3, 2);
  Model m0 = m3;
  m0.config = c0;
  for (auto &p : m0.layers)
    p.edge_encoder = {};
  for (auto &p : m3.layers)
    std::fill(p.edge_encoder.bias.begin(), p.edge_encoder.bias.end(), 0.0f);
  EXPECT_EQ(run_model(plain, m0), run_model(zeros, m3));
}

TEST(GcnLayer, SingleNodeIdentityIsRelu) {
  const Graph g(1, {}, rows({{0.5f, -2.0f, 1.0f}}));
  Model m = blank_model(ModelKind::GCN, 3, 3);
  m.layers[0].linear = identity(3);
  EXPECT_EQ(row_of(gcn_layer(g, features_of(g), m, 0).values, 0), (std::vector<Scalar>{0.5f, 0.0f, 1.0f}));
}

TEST(GcnLayer, SymmetricPairAllOnes) {
  const Graph g(2, {{0, 1}, {1, 0}}, Matrix(2, 2, 1.0f));
  Model m = blank_model(ModelKind::GCN, 2, 2);
  m.layers[0].linear = identity(2);
  const auto out = gcn_layer(g, features_of(g), m, 0);
  // each node: 1/sqrt(2*2) from itself plus 1/sqrt(2*2) from its partner
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t e = 0; e < 2; ++e)
      EXPECT_NEAR(out.values(i, e), 1.0f, 1e-6);
}

TEST(GatLayer, IsolatedNodeAttendsOnlyToItself) {
  const Graph g(2, {}, rows({{1.0f, 2.0f}, {-3.0f, 0.5f}}));
  ModelConfig c = preset("gat", 2, 0);
  c.num_layers = 1;
  const Model m = random_model(c, 3);
  const auto out = gat_layer(g, features_of(g), m, 0);
  std::vector<Scalar> wx(c.hidden_dim);
  m.layers[0].linear.apply(g.node_features().row(0), wx);
  EXPECT_LT(max_abs_diff(row_of(out.values, 0), wx), 1e-6);
}

TEST(GatLayer, UniformScoresGiveEqualWeights) {
  // star into node 0 from 1..3; zero attention vectors make all scores equal
  const Graph g(4, {{1, 0}, {2, 0}, {3, 0}}, rows({{1, 0}, {0, 1}, {2, 2}, {-1, 3}}));
  Model m = blank_model(ModelKind::GAT, 2, 2);
  m.layers[0].linear = identity(2);
  const auto out = gat_layer(g, features_of(g), m, 0);
  EXPECT_NEAR(out.values(0, 0), (1 + 0 + 2 - 1) / 4.0f, 1e-6);
  EXPECT_NEAR(out.values(0, 1), (0 + 1 + 2 + 3) / 4.0f, 1e-6);
}

TEST(GatLayer, AttentionWeightsSumToOne) {
  // with identical node features every neighbour carries the same W x, so the
  // output equals W x exactly when the weights over N(i) + {i} sum to one
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph r = graph_for("gat", 20, 4, seed, 6, 0);
    Matrix x(r.num_nodes(), 6);
    for (std::size_t i = 0; i < r.num_nodes(); ++i)
      std::copy(r.node_features().row(0).begin(), r.node_features().row(0).end(), x.row(i).begin());
    const Graph g(r.num_nodes(), r.coo(), x);
    ModelConfig c = preset("gat", 6, 0);
    c.num_layers = 1;
    Model m = random_model(c, seed);
    for (auto &v : m.layers[0].att_target.data())
      v *= 8.0f; // sharpen the softmax
    std::vector<Scalar> wx(c.hidden_dim);
    m.layers[0].linear.apply(x.row(0), wx);
    const auto out = gat_layer(g, features_of(g), m, 0);
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      EXPECT_LT(max_abs_diff(row_of(out.values, i), wx), 1e-6);
  }
}

TEST(PnaLayer, ScalersAreOneWhenLogDegreeEqualsAverage) {
  const Graph g(2, {{0, 1}}, rows({{0.7f}, {0.3f}}));
  Model m = blank_model(ModelKind::PNA, 1, 4);
  m.config.pna_avg_log_degree = std::log(2.0f);
  auto &w = m.layers[0].linear.weight; // columns: (scaler * 4 + aggregator) * F + e
  w(0, 0) = 1;
  w(0, 4) = -1; // identity minus amplification
  w(1, 0) = -1;
  w(1, 4) = 1;
  w(2, 0) = 1;  // identity scaler, mean
  w(3, 8) = 1;
  w(3, 0) = -1; // attenuation minus identity
  const auto out = pna_layer(g, features_of(g), m, 0);
  EXPECT_NEAR(out.values(1, 0), 0.0f, 1e-6);
  EXPECT_NEAR(out.values(1, 1), 0.0f, 1e-6);
  EXPECT_NEAR(out.values(1, 2), 0.7f, 1e-6);
  EXPECT_NEAR(out.values(1, 3), 0.0f, 1e-6);
}

TEST(PnaLayer, DegreeZeroFeedsZeroVector) {
  const Graph g(2, {{0, 1}}, rows({{0.7f, -0.2f}, {0.3f, 0.9f}}));
  Model m = blank_model(ModelKind::PNA, 2, 3);
  for (auto &v : m.layers[0].linear.weight.data())
    v = 1.0f;
  m.layers[0].linear.bias = {0.25f, 0.5f, 0.75f};
  const auto out = pna_layer(g, features_of(g), m, 0);
  EXPECT_EQ(row_of(out.values, 0), (std::vector<Scalar>{0.25f, 0.5f, 0.75f}));
}

TEST(PnaLayer, NonPositiveAverageLogDegreeRejected) {
  ModelConfig c = preset("pna", 4, 0);
  c.pna_avg_log_degree = 0.0f;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(random_model(c, 0), ConfigError);
}

TEST(DgnLayer, ConstantFieldZeroesDirectionalHalf) {
  const Graph g(3, {{0, 1}, {2, 1}, {1, 0}}, rows({{0.5f}, {1.0f}, {-2.0f}}), {}, {0.3f, 0.3f, 0.3f});
  const GraphContext ctx(g);
  for (Scalar w : ctx.dgn_weight)
    EXPECT_EQ(w, 0.0f);
  Model m = blank_model(ModelKind::DGN, 1, 1);
  m.layers[0].linear.weight(0, 1) = 1.0f; // read only the directional block
  const auto out = dgn_layer(g, features_of(g), m, 0);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(out.values(i, 0), 0.0f);
}

TEST(DgnLayer, SingleUphillNeighbourHasUnitWeight) {
  const Graph g(2, {{0, 1}}, rows({{0.5f}, {1.0f}}), {}, {0.9f, 0.1f});
  EXPECT_NEAR(GraphContext(g).dgn_weight[0], 1.0f, 1e-6);
  const Graph h(2, {{0, 1}}, rows({{0.5f}, {1.0f}}), {}, {-0.9f, 0.1f});
  EXPECT_NEAR(GraphContext(h).dgn_weight[0], -1.0f, 1e-6);
}

TEST(DgnLayer, MeanAndDerivativeBlocks) {
  // node 2 receives from 0 and 1; field deltas +1 and -3 give w = 0.25, -0.75
  const Graph g(3, {{0, 2}, {1, 2}}, rows({{2.0f}, {4.0f}, {1.0f}}), {}, {1.0f, -3.0f, 0.0f});
  Model m = blank_model(ModelKind::DGN, 1, 2);
  m.layers[0].linear = with_bias(identity(2));
  const auto out = dgn_layer(g, features_of(g), m, 0);
  EXPECT_NEAR(out.values(2, 0), 3.0f, 1e-6);
  // |0.25*2 - 0.75*4 - 1*(0.25 - 0.75)| = |0.5 - 3 + 0.5| = 2
  EXPECT_NEAR(out.values(2, 1), 2.0f, 1e-6);
}

TEST(DgnLayer, MissingFieldRejected) {
  const Graph g = graph_for("gcn", 8, 2, 1);
  ModelConfig c = preset("dgn", g.feature_dim(), 0);
  EXPECT_THROW(run_model(g, random_model(c, 0)), ConfigError);
}

TEST(VirtualNode, ZeroStateIdentityMlpSumsRealNodes) {
  // two real nodes with no real edges, node 2 is the virtual node
  const Graph g(3, {{0, 2}, {2, 0}, {1, 2}, {2, 1}}, rows({{1, 2}, {3, 0.5f}, {0, 0}}), {}, {}, true);
  ModelConfig c = preset("gin-vn", 2, 0);
  c.num_layers = 2;
  c.hidden_dim = 2;
  Model m = random_model(c, 0);
  for (auto *lin : {&m.layers[0].mlp0, &m.layers[0].mlp1, &m.layers[0].vn_mlp0, &m.layers[0].vn_mlp1})
    *lin = with_bias(identity(2));
  const std::vector<Scalar> vn0{0, 0};
  const auto [out, vn1] = virtual_node_step(g, features_of(g), vn0, m, 0);
  EXPECT_EQ(row_of(out.values, 0), (std::vector<Scalar>{1, 2}));
  EXPECT_EQ(row_of(out.values, 1), (std::vector<Scalar>{3, 0.5f}));
  EXPECT_EQ(vn1, (std::vector<Scalar>{4, 2.5f}));
}

TEST(VirtualNode, SingleRealNodeSeesItsOwnEmbedding) {
  const Graph g(2, {{0, 1}, {1, 0}}, rows({{1, 2}, {0, 0}}), {}, {}, true);
  ModelConfig c = preset("gin-vn", 2, 0);
  c.num_layers = 2;
  c.hidden_dim = 2;
  Model m = random_model(c, 0);
  for (auto *lin : {&m.layers[0].mlp0, &m.layers[0].mlp1, &m.layers[0].vn_mlp0, &m.layers[0].vn_mlp1})
    *lin = with_bias(identity(2));
  const std::vector<Scalar> vn0{1, 1};
  const auto [out, vn1] = virtual_node_step(g, features_of(g), vn0, m, 0);
  EXPECT_EQ(row_of(out.values, 0), (std::vector<Scalar>{2, 3}));
  // vn' = MLP(vn + (x0 + vn))
  EXPECT_EQ(vn1, (std::vector<Scalar>{3, 4}));
}

TEST(VirtualNode, StepMatchesFullModel) {
  const Graph g = graph_for("gin-vn", 20, 3, 8);
  ModelConfig c = config_for("gin-vn", g, 3, 16);
  const Model m = random_model(c, 4);
  EmbeddingBuffer x{initial_embeddings(g, c), 0};
  std::vector<Scalar> vn(c.input_dim, 0.0f);
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    auto [next, state] = virtual_node_step(g, x, vn, m, l);
    x = std::move(next);
    vn = std::move(state);
  }
  EXPECT_EQ(x.values, run_model_full(g, m).embeddings);
}

TEST(Readout, PoolOfIdenticalRows) {
  const Graph g(3, {}, Matrix(3, 2, 0.0f));
  EXPECT_EQ(global_mean_pool(g, Matrix(3, 2, 1.5f)), (std::vector<Scalar>{1.5f, 1.5f}));
}

TEST(Readout, PoolExcludesVirtualNode) {
  const Graph g(3, {{0, 2}, {2, 0}, {1, 2}, {2, 1}}, Matrix(3, 1), {}, {}, true);
  EXPECT_EQ(global_mean_pool(g, rows({{1}, {3}, {100}})), (std::vector<Scalar>{2}));
}

TEST(Readout, HeadOnZeroInputWithZeroBiasIsZero) {
  std::vector<Linear> head;
  Rng rng(1);
  std::size_t prev = 80;
  for (std::size_t d : {40, 20, 1}) {
    head.push_back(detail::random_linear(d, prev, true, rng));
    std::fill(head.back().bias.begin(), head.back().bias.end(), 0.0f);
    prev = d;
  }
  EXPECT_EQ(mlp_head(std::vector<Scalar>(80, 0.0f), head), (std::vector<Scalar>{0.0f}));
}

TEST(RunModel, ZeroLayersPoolsRawFeatures) {
  const Graph g = graph_for("gcn", 10, 3, 2);
  ModelConfig c = config_for("gcn", g, 0);
  c.num_layers = 0;
  c.head_dims = {4, 1};
  const Model m = random_model(c, 3);
  EXPECT_EQ(run_model(g, m), mlp_head(global_mean_pool(g, g.node_features()), m.head));
}

TEST(RunModel, DeterministicAcrossRuns) {
  for (const auto &name : kAllModels) {
    const Graph g = graph_for(name, 30, 4, 12);
    const Model m = random_model(config_for(name, g, 2, 32), 5);
    const auto a = run_model_full(g, m), b = run_model_full(g, m);
    EXPECT_EQ(a.embeddings, b.embeddings) << name;
    EXPECT_EQ(a.prediction, b.prediction) << name;
  }
}

TEST(RunModel, PermutationInvariance) {
  for (const auto &name : kAllModels) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Graph g = graph_for(name, 24, 4, 100 + seed);
      const Model m = random_model(config_for(name, g, 3, 32), seed);
      // relabel real nodes; the virtual node keeps the last ID
      const std::size_t real = g.num_real_nodes();
      std::vector<NodeId> perm(g.num_nodes());
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(seed);
      for (std::size_t i = real; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
      std::vector<std::size_t> edges(g.num_edges());
      std::iota(edges.begin(), edges.end(), 0);
      std::reverse(edges.begin(), edges.end());
      const Graph p = permuted(g, perm, edges);
      const auto a = run_model_full(g, m), b = run_model_full(p, m);
      EXPECT_LT(max_abs_diff(a.prediction, b.prediction), 1e-5) << name;
      for (NodeId v = 0; v < real; ++v)
        EXPECT_LT(max_abs_diff(row_of(a.embeddings, v), row_of(b.embeddings, perm[v])), 1e-4) << name;
    }
  }
}

TEST(RunModel, GinFiveLayersOnMoleculeFileIsFinite) {
  SyntheticSpec s;
  s.num_nodes = 26;
  s.avg_degree = 2.2;
  s.feature_dim = 9;
  s.edge_dim = 3;
  s.seed = 42;
  std::ostringstream os;
  save_graph(os, gen_synthetic(s), GraphFormat::Text);
  std::istringstream is(os.str());
  const Graph g = load_graph(is, GraphFormat::Text);
  const Model m = random_model(preset("gin", 9, 3), 1);
  const auto out = run_model_full(g, m);
  for (Scalar v : out.embeddings.data())
    EXPECT_TRUE(std::isfinite(v));
  for (Scalar v : out.prediction)
    EXPECT_TRUE(std::isfinite(v));
}

TEST(RunModel, IncompatibleInputsRejected) {
  const Graph g = graph_for("gin", 10, 3, 1, 9, 3);
  EXPECT_THROW(run_model(g, random_model(preset("gin", 8, 3), 0)), ConfigError);
  EXPECT_THROW(run_model(g, random_model(preset("gin", 9, 2), 0)), ConfigError);
  EXPECT_THROW(run_model(g, random_model(preset("gin-vn", 9, 3), 0)), ConfigError);
}
