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

#ifndef FLOWGNN_ORACLE_HPP
#define FLOWGNN_ORACLE_HPP

// Deliberately naive reference implementations in double precision. They
// share no code with the kernels beyond the parameter containers.

#include "flowgnn/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowgnn {

struct DenseGraph {
  Eigen::MatrixXd adjacency; ///< adjacency(src, dst) = 1 for every edge
  Eigen::MatrixXd features;  ///< N x F_in
  std::size_t num_real_nodes = 0;

  static DenseGraph from_graph(const Graph &g) {
    DenseGraph d;
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    d.adjacency = Eigen::MatrixXd::Zero(n, n);
    for (const Edge &e : g.coo()) {
      if (d.adjacency(e.src, e.dst) != 0.0)
        throw ConfigError("dense oracle needs a simple graph; duplicate edge (" + std::to_string(e.src) + "," +
                          std::to_string(e.dst) + ")");
      d.adjacency(e.src, e.dst) = 1.0;
    }
    d.features = Eigen::MatrixXd(n, static_cast<Eigen::Index>(g.feature_dim()));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d.features.cols(); ++j)
        d.features(i, j) = g.node_features()(i, j);
    d.num_real_nodes = g.num_real_nodes();
    return d;
  }
};

namespace oracle_detail {

inline Eigen::MatrixXd to_eigen(const Matrix &m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(r, c) = m(r, c);
  return out;
}

using Vec = std::vector<double>;

inline Vec linear(const Linear &lin, const Vec &x) {
  Vec y(lin.out_dim(), 0.0);
  for (std::size_t o = 0; o < y.size(); ++o) {
    double acc = lin.bias.empty() ? 0.0 : lin.bias[o];
    for (std::size_t i = 0; i < x.size(); ++i)
      acc += static_cast<double>(lin.weight(o, i)) * x[i];
    y[o] = acc;
  }
  return y;
}

inline Vec relu(Vec v) {
  for (auto &x : v)
    x = std::max(x, 0.0);
  return v;
}

inline Vec mlp(const Linear &a, const Linear &b, const Vec &x) { return linear(b, relu(linear(a, x))); }

inline Vec head(const std::vector<Linear> &layers, Vec v) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    v = linear(layers[k], v);
    if (k + 1 < layers.size())
      v = relu(v);
  }
  return v;
}

} // namespace oracle_detail

/// ReLU(D^-1/2 (A^T + I) D^-1/2 X W^T) with dense products; D counts in-edges plus the self loop.
inline Eigen::MatrixXd dense_gcn_oracle(const DenseGraph &g, const Eigen::MatrixXd &x, const LayerParams &p) {
  const Eigen::Index n = g.adjacency.rows();
  const Eigen::MatrixXd a_hat = g.adjacency.transpose() + Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd inv_sqrt = a_hat.rowwise().sum().array().rsqrt();
  const Eigen::MatrixXd norm = inv_sqrt.asDiagonal() * a_hat * inv_sqrt.asDiagonal();
  return (norm * x * oracle_detail::to_eigen(p.linear.weight).transpose()).cwiseMax(0.0);
}

inline Eigen::MatrixXd dense_gcn_oracle(const DenseGraph &g, const LayerParams &p) {
  return dense_gcn_oracle(g, g.features, p);
}

/// Full GCN model through the dense route: layers, mean pool, head.
inline std::vector<double> dense_gcn_model_oracle(const DenseGraph &g, const Model &m) {
  if (m.config.kind != ModelKind::GCN)
    throw ConfigError("dense oracle covers GCN only");
  Eigen::MatrixXd x = g.features;
  for (const auto &layer : m.layers)
    x = dense_gcn_oracle(g, x, layer);
  const auto real = static_cast<Eigen::Index>(g.num_real_nodes);
  Eigen::VectorXd pooled = x.topRows(real).colwise().mean();
  return oracle_detail::head(m.head, std::vector<double>(pooled.data(), pooled.data() + pooled.size()));
}

struct OracleOutput {
  std::vector<std::vector<double>> embeddings;
  std::vector<double> prediction;
};

/// Per-edge message passing straight over the COO list: every message is
/// materialised, then each destination reduces its own list.
inline OracleOutput brute_force_mp_oracle_full(const Graph &g, const Model &m) {
  using oracle_detail::Vec;
  namespace od = oracle_detail;
  const auto &c = m.config;
  const std::size_t n = g.num_nodes();
  const bool vn_model = c.virtual_node && g.has_virtual_node();
  const NodeId vn = g.has_virtual_node() ? g.virtual_node() : 0;

  std::vector<Vec> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = g.node_features().row(i);
    x[i].assign(r.begin(), r.end());
  }
  if (vn_model)
    std::fill(x[vn].begin(), x[vn].end(), 0.0);

  std::vector<double> in_deg(n, 0.0);
  for (const Edge &e : g.coo())
    in_deg[e.dst] += 1.0;

  auto edge_feature = [&](std::size_t k) {
    Vec v(g.edge_dim());
    for (std::size_t d = 0; d < v.size(); ++d)
      v[d] = g.edge_features()(k, d);
    return v;
  };

  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const LayerParams &p = m.layers[l];
    const std::size_t fin = c.layer_in_dim(l);
    std::vector<Vec> out(n);
    switch (c.kind) {
    case ModelKind::GCN: {
      std::vector<Vec> h(n);
      for (std::size_t i = 0; i < n; ++i)
        h[i] = od::linear(p.linear, x[i]);
      std::vector<std::pair<NodeId, Vec>> messages;
      for (const Edge &e : g.coo()) {
        Vec msg = h[e.src];
        for (auto &v : msg)
          v /= std::sqrt((in_deg[e.src] + 1.0) * (in_deg[e.dst] + 1.0));
        messages.emplace_back(e.dst, msg);
      }
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = h[i];
        for (auto &v : out[i])
          v /= in_deg[i] + 1.0;
      }
      for (auto &[dst, msg] : messages)
        for (std::size_t e = 0; e < msg.size(); ++e)
          out[dst][e] += msg[e];
      for (auto &o : out)
        o = od::relu(o);
      break;
    }
    case ModelKind::GIN: {
      std::vector<Vec> xin = x;
      if (vn_model)
        for (std::size_t i = 0; i < n; ++i)
          if (i != vn)
            for (std::size_t e = 0; e < fin; ++e)
              xin[i][e] += x[vn][e];
      std::vector<Vec> acc(n, Vec(fin, 0.0));
      for (std::size_t k = 0; k < g.num_edges(); ++k) {
        const Edge &ed = g.edge(static_cast<EdgeId>(k));
        if (vn_model && ed.src == vn)
          continue;
        Vec msg = xin[ed.src];
        if (!(vn_model && ed.dst == vn)) {
          if (!p.edge_encoder.empty()) {
            const Vec enc = od::linear(p.edge_encoder, edge_feature(k));
            for (std::size_t e = 0; e < fin; ++e)
              msg[e] += enc[e];
          }
          msg = od::relu(msg);
        }
        for (std::size_t e = 0; e < fin; ++e)
          acc[ed.dst][e] += msg[e];
      }
      for (std::size_t i = 0; i < n; ++i) {
        Vec z(fin);
        if (vn_model && i == vn) {
          if (p.vn_mlp0.empty()) {
            out[i].assign(c.hidden_dim, 0.0);
            continue;
          }
          for (std::size_t e = 0; e < fin; ++e)
            z[e] = xin[i][e] + acc[i][e];
          out[i] = od::mlp(p.vn_mlp0, p.vn_mlp1, z);
          continue;
        }
        for (std::size_t e = 0; e < fin; ++e)
          z[e] = (1.0 + p.epsilon) * xin[i][e] + acc[i][e];
        out[i] = od::mlp(p.mlp0, p.mlp1, z);
      }
      break;
    }
    case ModelKind::PNA: {
      std::vector<std::vector<Vec>> inbox(n);
      for (std::size_t k = 0; k < g.num_edges(); ++k) {
        const Edge &ed = g.edge(static_cast<EdgeId>(k));
        Vec msg = x[ed.src];
        if (!p.edge_encoder.empty()) {
          const Vec enc = od::linear(p.edge_encoder, edge_feature(k));
          for (std::size_t e = 0; e < fin; ++e)
            msg[e] += enc[e];
        }
        inbox[ed.dst].push_back(od::relu(msg));
      }
      for (std::size_t i = 0; i < n; ++i) {
        Vec y(12 * fin, 0.0);
        const double d = static_cast<double>(inbox[i].size());
        if (d > 0) {
          const double amp = std::log(d + 1.0) / c.pna_avg_log_degree;
          const double att = c.pna_avg_log_degree / std::log(d + 1.0);
          for (std::size_t e = 0; e < fin; ++e) {
            double s = 0, sq = 0, mx = -std::numeric_limits<double>::infinity(),
                   mn = std::numeric_limits<double>::infinity();
            for (const Vec &msg : inbox[i]) {
              s += msg[e];
              sq += msg[e] * msg[e];
              mx = std::max(mx, msg[e]);
              mn = std::min(mn, msg[e]);
            }
            const double mu = s / d;
            const double sd = std::sqrt(std::max(sq / d - mu * mu, 0.0) + 1e-5);
            const double aggs[4] = {mu, sd, mx, mn};
            const double scalers[3] = {1.0, amp, att};
            for (std::size_t sc = 0; sc < 3; ++sc)
              for (std::size_t a = 0; a < 4; ++a)
                y[(sc * 4 + a) * fin + e] = scalers[sc] * aggs[a];
          }
        }
        out[i] = od::relu(od::linear(p.linear, y));
      }
      break;
    }
    case ModelKind::DGN: {
      const auto &f = g.node_field();
      std::vector<double> denom(n, 0.0);
      for (const Edge &e : g.coo())
        denom[e.dst] += std::abs(static_cast<double>(f[e.src]) - f[e.dst]);
      std::vector<Vec> sum(n, Vec(fin, 0.0)), dir(n, Vec(fin, 0.0));
      std::vector<double> wsum(n, 0.0);
      for (const Edge &e : g.coo()) {
        const double w = (static_cast<double>(f[e.src]) - f[e.dst]) / (denom[e.dst] + 1e-8);
        wsum[e.dst] += w;
        for (std::size_t k = 0; k < fin; ++k) {
          sum[e.dst][k] += x[e.src][k];
          dir[e.dst][k] += w * x[e.src][k];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        Vec y(2 * fin, 0.0);
        for (std::size_t k = 0; k < fin; ++k) {
          y[k] = in_deg[i] > 0 ? sum[i][k] / in_deg[i] : 0.0;
          y[fin + k] = std::abs(dir[i][k] - x[i][k] * wsum[i]);
        }
        out[i] = od::relu(od::linear(p.linear, y));
      }
      break;
    }
    case ModelKind::GAT: {
      const std::size_t heads = c.gat_heads, fh = c.gat_head_dim;
      std::vector<Vec> h(n);
      for (std::size_t i = 0; i < n; ++i)
        h[i] = od::linear(p.linear, x[i]);
      std::vector<std::vector<NodeId>> nbrs(n);
      for (std::size_t i = 0; i < n; ++i)
        nbrs[i].push_back(static_cast<NodeId>(i));
      for (const Edge &e : g.coo())
        nbrs[e.dst].push_back(e.src);
      for (std::size_t i = 0; i < n; ++i) {
        out[i].assign(heads * fh, 0.0);
        for (std::size_t hd = 0; hd < heads; ++hd) {
          std::vector<double> s;
          for (NodeId j : nbrs[i]) {
            double v = 0.0;
            for (std::size_t k = 0; k < fh; ++k)
              v += static_cast<double>(p.att_target(hd, k)) * h[i][hd * fh + k] +
                   static_cast<double>(p.att_neighbor(hd, k)) * h[j][hd * fh + k];
            s.push_back(v > 0 ? v : c.gat_leaky_slope * v);
          }
          const double mx = *std::max_element(s.begin(), s.end());
          double z = 0.0;
          for (auto &v : s)
            z += (v = std::exp(v - mx));
          for (std::size_t t = 0; t < nbrs[i].size(); ++t)
            for (std::size_t k = 0; k < fh; ++k)
              out[i][hd * fh + k] += s[t] / z * h[nbrs[i][t]][hd * fh + k];
        }
      }
      break;
    }
    }
    x = std::move(out);
  }

  const std::size_t real = g.num_real_nodes();
  Vec pooled(c.output_dim(), 0.0);
  for (std::size_t i = 0; i < real; ++i)
    for (std::size_t e = 0; e < pooled.size(); ++e)
      pooled[e] += x[i][e];
  if (real > 0)
    for (auto &v : pooled)
      v /= static_cast<double>(real);
  return {x, od::head(m.head, pooled)};
}

inline std::vector<double> brute_force_mp_oracle(const Graph &g, const Model &m) {
  return brute_force_mp_oracle_full(g, m).prediction;
}

} // namespace flowgnn

#endif
