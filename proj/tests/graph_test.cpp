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

#include "flowgnn/graph_io.hpp"
#include "flowgnn/partition.hpp"
#include "flowgnn/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

using namespace flowgnn;

namespace {

Graph from_edges(std::size_t n, std::vector<Edge> coo) { return Graph(n, std::move(coo), Matrix(n, 1, 1.0f)); }

Graph small_chain() { return from_edges(4, {{0, 1}, {1, 2}, {1, 3}, {2, 1}}); }

std::string error_of(const std::string &text) {
  std::istringstream is(text);
  try {
    load_graph(is, GraphFormat::Text);
  } catch (const FormatError &e) {
    return e.what();
  }
  return {};
}

std::vector<Graph> random_graphs(std::size_t count) {
  std::vector<Graph> out;
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticSpec s;
    s.num_nodes = 1 + i % 40;
    s.avg_degree = static_cast<double>(i % 5);
    s.topology = static_cast<Topology>(i % 3);
    s.edge_dim = i % 3;
    s.with_field = i % 2;
    s.seed = i;
    out.push_back(gen_synthetic(s));
  }
  return out;
}

std::multiset<std::pair<NodeId, NodeId>> expand(const CompressedView &v, bool csr) {
  std::multiset<std::pair<NodeId, NodeId>> out;
  for (NodeId r = 0; r < v.num_rows(); ++r)
    for (std::size_t p = v.begin(r); p < v.end(r); ++p)
      out.emplace(csr ? r : v.col_idx[p], csr ? v.col_idx[p] : r);
  return out;
}

} // namespace

TEST(GraphLoad, MinimalTextFile) {
  std::istringstream is("2 1 1 0\n0 1\n0.5\n1.5\n");
  const Graph g = load_graph(is, GraphFormat::Text);
  EXPECT_EQ(g.num_nodes(), 2u);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.coo(), (std::vector<Edge>{{0, 1}}));
  EXPECT_FLOAT_EQ(g.node_features()(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(g.node_features()(1, 0), 1.5f);
  EXPECT_FALSE(g.has_edge_features());
}

TEST(GraphLoad, EdgeIndexOutOfRangeNamesLine) {
  const auto msg = error_of("3 1 1 0\n5 0\n1\n1\n1\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("out of range"), std::string::npos) << msg;
}

TEST(GraphLoad, MalformedHeader) {
  EXPECT_NE(error_of("2 x 1 0\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("").find("line"), std::string::npos);
}

TEST(GraphLoad, FeatureRowCountMismatch) {
  EXPECT_NE(error_of("2 0 1 0\n0.5\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("2 0 1 0\n0.5\n0.5\n0.5\n").find("line 4"), std::string::npos);
  EXPECT_NE(error_of("2 0 2 0\n0.5\n0.5 1\n").find("line 2"), std::string::npos);
}

TEST(GraphLoad, BinaryErrorsCarryByteOffsets) {
  SyntheticSpec s;
  s.num_nodes = 5;
  s.seed = 3;
  std::ostringstream os;
  save_graph(os, gen_synthetic(s), GraphFormat::Binary);
  const std::string bytes = os.str();

  std::istringstream bad_magic("XXXX" + bytes.substr(4));
  try {
    load_graph(bad_magic, GraphFormat::Binary);
    FAIL();
  } catch (const FormatError &e) {
    EXPECT_NE(std::string(e.what()).find("byte 0"), std::string::npos);
  }
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  try {
    load_graph(truncated, GraphFormat::Binary);
    FAIL();
  } catch (const FormatError &e) {
    EXPECT_NE(std::string(e.what()).find("byte "), std::string::npos);
  }
}

TEST(GraphLoad, RoundTripTextAndBinary) {
  for (const Graph &g : random_graphs(100)) {
    for (auto fmt : {GraphFormat::Text, GraphFormat::Binary}) {
      std::ostringstream os;
      save_graph(os, g, fmt, "tool=test\n");
      std::istringstream is(os.str());
      EXPECT_EQ(load_graph(is, fmt), g);
    }
  }
}

TEST(GraphLoad, TextSaveIsByteStable) {
  for (const Graph &g : random_graphs(20)) {
    std::ostringstream a, b;
    save_graph(a, g, GraphFormat::Text);
    std::istringstream is(a.str());
    save_graph(b, load_graph(is, GraphFormat::Text), GraphFormat::Text);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(GraphLoad, KeepsFileEdgeOrder) {
  std::istringstream is("3 3 1 0\n2 0\n0 1\n1 0\n1\n1\n1\n");
  EXPECT_EQ(load_graph(is, GraphFormat::Text).coo(), (std::vector<Edge>{{2, 0}, {0, 1}, {1, 0}}));
}

TEST(GraphLoad, EdgeListCompactsSparseIds) {
  std::istringstream is("# citation graph\n10 30\n30 20\n");
  const Graph g = load_edge_list(is);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.coo(), (std::vector<Edge>{{0, 2}, {2, 1}}));
}

TEST(Views, CsrOfSmallChain) {
  const auto csr = build_csr(small_chain());
  EXPECT_EQ(csr.row_ptr, (std::vector<EdgeId>{0, 1, 3, 4, 4}));
  EXPECT_EQ(csr.col_idx, (std::vector<NodeId>{1, 2, 3, 1}));
}

TEST(Views, EmptyGraph) {
  const Graph g(3, {}, Matrix(3, 1));
  EXPECT_EQ(build_csr(g).row_ptr, (std::vector<EdgeId>{0, 0, 0, 0}));
  EXPECT_EQ(build_csc(g).row_ptr, (std::vector<EdgeId>{0, 0, 0, 0}));
}

TEST(Views, CscSingleEdge) {
  const auto csc = build_csc(from_edges(2, {{0, 1}}));
  ASSERT_EQ(csc.degree(1), 1u);
  EXPECT_EQ(csc.col_idx[csc.begin(1)], 0u);
  EXPECT_EQ(csc.degree(0), 0u);
}

TEST(Views, ExpansionReproducesCooAndKeepsOrder) {
  for (const Graph &g : random_graphs(60)) {
    std::multiset<std::pair<NodeId, NodeId>> coo;
    for (const Edge &e : g.coo())
      coo.emplace(e.src, e.dst);
    const auto csr = build_csr(g), csc = build_csc(g);
    EXPECT_EQ(expand(csr, true), coo);
    EXPECT_EQ(expand(csc, false), coo);
    for (const auto *v : {&csr, &csc})
      for (NodeId r = 0; r < v->num_rows(); ++r)
        EXPECT_TRUE(std::is_sorted(v->edge_perm.begin() + v->begin(r), v->edge_perm.begin() + v->end(r)));
  }
}

TEST(Degrees, SmallChainInDegrees) {
  EXPECT_EQ(degrees(small_chain(), Direction::In), (std::vector<std::size_t>{0, 2, 1, 1}));
  EXPECT_EQ(degrees(small_chain(), Direction::Out), (std::vector<std::size_t>{1, 2, 1, 0}));
}

TEST(Degrees, Ring) {
  const Graph ring = from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  EXPECT_EQ(degrees(ring, Direction::In), (std::vector<std::size_t>(4, 1)));
}

TEST(Degrees, SumToEdgeCount) {
  for (const Graph &g : random_graphs(50))
    for (auto dir : {Direction::In, Direction::Out}) {
      const auto d = degrees(g, dir);
      EXPECT_EQ(std::accumulate(d.begin(), d.end(), std::size_t{0}), g.num_edges());
    }
}

TEST(Partition, SixNodesTwoBanks) {
  const Graph g = from_edges(6, {{0, 1}, {1, 2}, {1, 3}, {2, 1}, {4, 5}, {5, 0}});
  const auto banks = partition_edges(g, 2);
  for (NodeId v : {0u, 1u, 2u})
    EXPECT_EQ(banks.bank_of_dst(v), 0u);
  for (NodeId v : {3u, 4u, 5u})
    EXPECT_EQ(banks.bank_of_dst(v), 1u);
  EXPECT_EQ(banks.per_bank_edge_count(), (std::vector<std::size_t>{4, 2}));
}

TEST(Partition, SingleBankHoldsEverything) {
  const Graph g = small_chain();
  EXPECT_EQ(partition_edges(g, 1).per_bank_edge_count(), (std::vector<std::size_t>{4}));
}

TEST(Partition, ConservesEdgesAndMatchesBankFunction) {
  for (const Graph &g : random_graphs(50)) {
    for (std::size_t p : {1, 2, 3, 4, 8, 64}) {
      const auto banks = partition_edges(g, p);
      std::vector<std::size_t> count(p, 0);
      for (const Edge &e : g.coo())
        ++count[banks.bank_of_dst(e.dst)];
      EXPECT_EQ(count, banks.per_bank_edge_count());
      // contiguous blocks that differ by at most one node
      std::vector<std::size_t> block(p, 0);
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (v > 0) {
          EXPECT_LE(banks.bank_of_dst(v - 1), banks.bank_of_dst(v));
        }
        ++block[banks.bank_of_dst(v)];
      }
      const auto [lo, hi] = std::minmax_element(block.begin(), block.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
  }
}

TEST(Partition, ZeroBanksRejected) { EXPECT_THROW(partition_edges(small_chain(), 0), ConfigError); }

TEST(Imbalance, AllEdgesToOneNodeIsMaximal) {
  std::vector<Edge> coo;
  for (NodeId s = 1; s < 8; ++s)
    coo.push_back({s, 0});
  const Graph g = from_edges(8, coo);
  for (std::size_t p : {2, 4, 8})
    EXPECT_DOUBLE_EQ(workload_imbalance(g, p), 100.0);
}

TEST(Imbalance, EvenSplitIsZero) {
  const Graph ring = from_edges(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 0}});
  for (std::size_t p : {2, 4, 8})
    EXPECT_DOUBLE_EQ(workload_imbalance(ring, p), 0.0);
}

TEST(Imbalance, Errors) {
  EXPECT_THROW(workload_imbalance(from_edges(3, {}), 2), Error);
  EXPECT_THROW(workload_imbalance(small_chain(), 1), ConfigError);
}

TEST(Imbalance, BoundedAndStrictlyIncreasesWhenSkewGrows) {
  for (const Graph &g : random_graphs(40)) {
    if (g.num_edges() == 0 || g.num_nodes() < 4)
      continue;
    const double v = workload_imbalance(g, 2);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
    // move one edge from the lighter bank to the heavier one
    const auto banks = partition_edges(g, 2);
    const auto &c = banks.per_bank_edge_count();
    if (c[0] == 0 || c[1] == 0)
      continue;
    const std::size_t heavy = c[0] >= c[1] ? 0 : 1;
    const NodeId target = heavy == 0 ? 0 : static_cast<NodeId>(g.num_nodes() - 1);
    auto coo = g.coo();
    for (auto &e : coo)
      if (banks.bank_of_dst(e.dst) != heavy) {
        e.dst = target;
        break;
      }
    EXPECT_GT(workload_imbalance(from_edges(g.num_nodes(), coo), 2), v);
  }
}

TEST(Synthetic, Deterministic) {
  SyntheticSpec s;
  s.num_nodes = 50;
  s.edge_dim = 2;
  s.with_field = true;
  s.seed = 77;
  EXPECT_EQ(gen_synthetic(s), gen_synthetic(s));
  auto other = s;
  other.seed = 78;
  EXPECT_FALSE(gen_synthetic(s) == gen_synthetic(other));
}

TEST(Synthetic, VirtualNodeConnectsToAll) {
  SyntheticSpec s;
  s.num_nodes = 5;
  s.topology = Topology::WithVirtualNode;
  const Graph g = gen_synthetic(s);
  ASSERT_TRUE(g.has_virtual_node());
  EXPECT_EQ(degrees(g, Direction::In)[4], 4u);
  EXPECT_EQ(degrees(g, Direction::Out)[4], 4u);
}

TEST(Synthetic, PowerLawHasHubs) {
  SyntheticSpec s;
  s.num_nodes = 512;
  s.avg_degree = 4;
  s.topology = Topology::PowerLaw;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    s.seed = seed;
    const Graph g = gen_synthetic(s);
    const auto d = degrees(g, Direction::In);
    const double avg = static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
    EXPECT_GT(static_cast<double>(*std::max_element(d.begin(), d.end())), 3.0 * avg);
  }
}

TEST(Synthetic, FeaturesInUnitRange) {
  SyntheticSpec s;
  s.num_nodes = 30;
  s.edge_dim = 4;
  s.with_field = true;
  const Graph g = gen_synthetic(s);
  for (const auto *m : {&g.node_features(), &g.edge_features()})
    for (Scalar v : m->data()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
}
