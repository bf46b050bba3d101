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

// flowgnn: command-line front end (gen, inspect, infer, verify, simulate,
// ablate, sweep, imbalance, weights).

#include "flowgnn/dse.hpp"
#include "flowgnn/graph_io.hpp"
#include "flowgnn/kernels.hpp"
#include "flowgnn/manifest.hpp"
#include "flowgnn/oracle.hpp"
#include "flowgnn/partition.hpp"
#include "flowgnn/simulator.hpp"
#include "flowgnn/synthetic.hpp"
#include "flowgnn/weights_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace flowgnn;

namespace {

constexpr const char *kVersion = "1.0.0";

class VerifyMismatch : public Error {
public:
  using Error::Error;
};

std::string join_sizes(const std::vector<std::size_t> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt(double v, int digits = 6) { return sim::report_detail::fixed(v, digits); }

Manifest base_manifest(const std::string &command) {
  Manifest m;
  m.add("tool", "flowgnn").add("version", kVersion).add("command", command);
  return m;
}

/// Writes `body` to --out (or stdout) in binary mode.
void emit(const std::string &out, const std::string &body) {
  if (out.empty() || out == "-") {
    std::cout << body;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f)
    throw Error("--out: cannot write '" + out + "'");
  f << body;
}

// ---- graph inputs -----------------------------------------------------------

struct GraphInputs {
  std::vector<std::string> paths;
  std::string format = "auto";
};

void add_graph_flags(CLI::App *cmd, GraphInputs &in, bool many) {
  if (many)
    cmd->add_option("--graph,--graphs", in.paths, "Graph files or directories (sorted, non-recursive)")
        ->required()
        ->delimiter(',');
  else
    cmd->add_option("--graph", in.paths, "Graph file")->required()->expected(1);
  cmd->add_option("--format", in.format, "Input format")
      ->check(CLI::IsMember({"auto", "text", "binary", "edgelist"}))
      ->capture_default_str();
}

Graph load_one(const std::string &path, const std::string &format) {
  if (!fs::exists(path))
    throw Error("--graph: file '" + path + "' does not exist");
  try {
    if (format == "auto")
      return load_graph_file(path);
    std::ifstream f(path, std::ios::binary);
    if (format == "edgelist")
      return load_edge_list(f);
    return load_graph(f, format == "binary" ? GraphFormat::Binary : GraphFormat::Text);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::string> expand_paths(const std::vector<std::string> &paths) {
  std::vector<std::string> out;
  for (const auto &p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> files;
      for (const auto &e : fs::directory_iterator(p))
        if (e.is_regular_file())
          files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      if (files.empty())
        throw Error("--graph: directory '" + p + "' holds no files");
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Graph> load_inputs(const GraphInputs &in, Manifest &man, std::vector<std::string> *names = nullptr) {
  std::vector<Graph> graphs;
  std::size_t i = 0;
  for (const auto &p : expand_paths(in.paths)) {
    graphs.push_back(load_one(p, in.format));
    man.add_file("input" + std::to_string(i++), p);
    if (names)
      names->push_back(fs::path(p).filename().string());
  }
  man.add("input_format", in.format);
  return graphs;
}

// ---- model flags ------------------------------------------------------------

struct ModelOptions {
  std::string model = "gcn";
  int layers = -1;
  int hidden = -1;
  int heads = -1;
  int head_dim = -1;
  double pna_avg_log_degree = 0.0;
  std::string weights;
  std::uint64_t weight_seed = 0;
};

void add_model_flags(CLI::App *cmd, ModelOptions &o, bool allow_all = false) {
  std::vector<std::string> names{"gcn", "gin", "gin-vn", "gat", "pna", "dgn"};
  if (allow_all)
    names.push_back("all");
  cmd->add_option("--model", o.model, "Model preset")->check(CLI::IsMember(names))->capture_default_str();
  cmd->add_option("--layers", o.layers, "Override layer count");
  cmd->add_option("--hidden", o.hidden, "Override hidden width");
  cmd->add_option("--heads", o.heads, "GAT heads");
  cmd->add_option("--head-dim", o.head_dim, "GAT per-head width");
  cmd->add_option("--pna-avg-log-degree", o.pna_avg_log_degree,
                  "PNA average log degree (default: mean log(d+1) over the input graphs)");
  cmd->add_option("--weights", o.weights, "FGWT weight file (default: seeded random weights)");
  cmd->add_option("--weight-seed", o.weight_seed, "Seed for random weights")->capture_default_str();
}

double mean_log_degree(const std::vector<Graph> &graphs) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto &g : graphs) {
    for (auto d : degrees(g, Direction::In))
      s += std::log(static_cast<double>(d) + 1.0);
    n += g.num_nodes();
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

ModelConfig make_config(const ModelOptions &o, const std::string &name, const std::vector<Graph> &graphs,
                        Manifest &man) {
  if (graphs.empty())
    throw ConfigError("no input graphs");
  const Graph &g = graphs.front();
  ModelConfig c = preset(name, g.feature_dim(), g.edge_dim());
  if (o.layers >= 0)
    c.num_layers = static_cast<std::size_t>(o.layers);
  if (c.kind == ModelKind::GAT) {
    if (o.heads > 0)
      c.gat_heads = static_cast<std::size_t>(o.heads);
    if (o.head_dim > 0)
      c.gat_head_dim = static_cast<std::size_t>(o.head_dim);
    if (o.hidden > 0 && o.hidden != static_cast<int>(c.gat_heads * c.gat_head_dim))
      throw ConfigError("--hidden must equal --heads * --head-dim for gat");
    c.hidden_dim = c.gat_heads * c.gat_head_dim;
  } else if (o.hidden > 0) {
    c.hidden_dim = static_cast<std::size_t>(o.hidden);
  }
  if (c.kind == ModelKind::PNA) {
    c.pna_avg_log_degree =
        static_cast<Scalar>(o.pna_avg_log_degree > 0 ? o.pna_avg_log_degree : mean_log_degree(graphs));
    if (!(c.pna_avg_log_degree > 0))
      throw ConfigError("--pna-avg-log-degree: input graphs have no edges; pass a positive value");
  }
  c.validate();
  man.add("model", c.name())
      .add("layers", std::to_string(c.num_layers))
      .add("input_dim", std::to_string(c.input_dim))
      .add("hidden_dim", std::to_string(c.hidden_dim))
      .add("edge_dim", std::to_string(c.edge_dim))
      .add("head_dims", join_sizes(c.head_dims));
  if (c.kind == ModelKind::GAT)
    man.add("gat_heads", std::to_string(c.gat_heads)).add("gat_head_dim", std::to_string(c.gat_head_dim));
  if (c.kind == ModelKind::PNA)
    man.add("pna_avg_log_degree", io::format_scalar(c.pna_avg_log_degree));
  return c;
}

Model make_model(const ModelOptions &o, const ModelConfig &c, Manifest &man) {
  if (!o.weights.empty()) {
    if (!fs::exists(o.weights))
      throw Error("--weights: file '" + o.weights + "' does not exist");
    man.add_file("weights", o.weights);
    return load_weights_file(o.weights, c);
  }
  man.add("weight_seed", std::to_string(o.weight_seed));
  return random_model(c, o.weight_seed);
}

// ---- parallelism flags ------------------------------------------------------

struct ParallelOptions {
  sim::ParallelismConfig pc;
  std::string strategy = "multiqueue";
  std::string queue_depth = "16";
};

std::size_t parse_depth(const std::string &s) {
  if (s == "unbounded")
    return sim::kUnboundedQueue;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0)
    throw ConfigError("--queue-depth: expected a positive integer or 'unbounded', got '" + s + "'");
  return v;
}

void add_parallel_flags(CLI::App *cmd, ParallelOptions &o) {
  cmd->add_option("--p-node", o.pc.p_node, "NT units")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--p-edge", o.pc.p_edge, "MP units")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--p-apply", o.pc.p_apply, "NT lanes")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--p-scatter", o.pc.p_scatter, "MP lanes")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--queue-depth", o.queue_depth, "Adapter queue depth in beats, or 'unbounded'")
      ->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "Pipeline strategy")
      ->check(CLI::IsMember({"non-pipelined", "fixed-pipeline", "baseline-dataflow", "multiqueue"}))
      ->capture_default_str();
  cmd->add_option("--layer-overhead", o.pc.layer_overhead_cycles, "Fixed cycles per layer")->capture_default_str();
}

sim::ParallelismConfig resolve(ParallelOptions &o, Manifest &man) {
  o.pc.strategy = sim::parse_strategy(o.strategy);
  o.pc.queue_depth_beats = parse_depth(o.queue_depth);
  o.pc.validate();
  man.add("strategy", o.strategy)
      .add("p_node", std::to_string(o.pc.p_node))
      .add("p_edge", std::to_string(o.pc.p_edge))
      .add("p_apply", std::to_string(o.pc.p_apply))
      .add("p_scatter", std::to_string(o.pc.p_scatter))
      .add("queue_depth", o.queue_depth)
      .add("layer_overhead", std::to_string(o.pc.layer_overhead_cycles));
  return o.pc;
}

std::string join_prediction(const std::vector<Scalar> &p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += (i ? ";" : "") + io::format_scalar(p[i]);
  return s;
}

// ---- commands ---------------------------------------------------------------

struct GenOptions {
  SyntheticSpec spec;
  std::string topology = "uniform";
  std::string format = "text";
  std::string out;
};

void cmd_gen(GenOptions &o) {
  o.spec.topology = parse_topology(o.topology);
  if (o.spec.num_nodes == 0)
    throw ConfigError("--nodes must be >= 1");
  if (o.spec.avg_degree < 0)
    throw ConfigError("--avg-degree must be >= 0");
  Graph g = gen_synthetic(o.spec);
  Manifest man = base_manifest("gen");
  man.add("nodes", std::to_string(o.spec.num_nodes))
      .add("avg_degree", fmt(o.spec.avg_degree))
      .add("topology", o.topology)
      .add("feature_dim", std::to_string(o.spec.feature_dim))
      .add("edge_dim", std::to_string(o.spec.edge_dim))
      .add("field", o.spec.with_field ? "1" : "0")
      .add("seed", std::to_string(o.spec.seed))
      .add("format", o.format);
  std::ostringstream os;
  save_graph(os, g, o.format == "binary" ? GraphFormat::Binary : GraphFormat::Text, man.text());
  emit(o.out, os.str());
}

void cmd_inspect(const GraphInputs &in, const std::string &out) {
  Manifest man = base_manifest("inspect");
  const Graph g = load_inputs(in, man).front();
  const auto din = degrees(g, Direction::In), dout = degrees(g, Direction::Out);
  auto stats = [](const std::vector<std::size_t> &d) {
    if (d.empty())
      return std::string("0;0;0");
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    double s = 0;
    for (auto x : d)
      s += static_cast<double>(x);
    return std::to_string(*lo) + ";" + std::to_string(*hi) + ";" + fmt(s / static_cast<double>(d.size()), 4);
  };
  std::size_t isolated = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    isolated += din[i] == 0 && dout[i] == 0;
  std::ostringstream os;
  os << man.comment_block() << "nodes=" << g.num_nodes() << "\nedges=" << g.num_edges()
     << "\nfeature_dim=" << g.feature_dim() << "\nedge_dim=" << g.edge_dim()
     << "\nvirtual_node=" << (g.has_virtual_node() ? 1 : 0) << "\nnode_field=" << (g.has_node_field() ? 1 : 0)
     << "\nin_degree_min_max_mean=" << stats(din) << "\nout_degree_min_max_mean=" << stats(dout)
     << "\nisolated_nodes=" << isolated << '\n';
  if (g.num_edges() > 0)
    for (std::size_t p : {2, 4, 8})
      os << "imbalance_p_edge_" << p << '=' << fmt(workload_imbalance(g, p), 4) << '\n';
  emit(out, os.str());
}

void cmd_infer(const GraphInputs &in, const ModelOptions &mo, const std::string &out) {
  Manifest man = base_manifest("infer");
  const auto graphs = load_inputs(in, man);
  const auto cfg = make_config(mo, mo.model, graphs, man);
  const Model model = make_model(mo, cfg, man);
  const auto pred = run_model(graphs.front(), model);
  emit(out, man.comment_block() + "prediction=" + join_prediction(pred) + "\n");
}

struct VerifyOptions {
  std::size_t trials = 10;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

/// Compares the engine against the per-edge oracle (and, for GCN on simple
/// graphs, the dense oracle) over `trials` random weight draws cycling through
/// the inputs.
int cmd_verify(const GraphInputs &in, const ModelOptions &mo, const VerifyOptions &vo, const std::string &out) {
  Manifest man = base_manifest("verify");
  std::vector<std::string> names;
  const auto graphs = load_inputs(in, man, &names);
  man.add("trials", std::to_string(vo.trials)).add("tol", fmt(vo.tol, 9)).add("seed", std::to_string(vo.seed));
  std::vector<std::string> models{mo.model};
  if (mo.model == "all")
    models = {"gcn", "gin", "gin-vn", "gat", "pna", "dgn"};
  std::ostringstream body;
  body << "model,graph,trial,max_abs_oracle,max_abs_dense,status\n";
  std::size_t failures = 0, checks = 0;
  for (const auto &name : models) {
    for (std::size_t t = 0; t < vo.trials; ++t) {
      const std::size_t gi = t % graphs.size();
      const Graph &g = graphs[gi];
      Manifest scratch;
      std::vector<Graph> one{g};
      ModelConfig cfg;
      try {
        cfg = make_config(mo, name, one, scratch);
        check_compatible(g, cfg);
      } catch (const ConfigError &e) {
        body << name << ',' << names[gi] << ',' << t << ",-,-,skipped (" << e.what() << ")\n";
        continue;
      }
      const Model model = mo.weights.empty() ? random_model(cfg, vo.seed + t) : load_weights_file(mo.weights, cfg);
      const auto engine = run_model_full(g, model);
      const auto oracle = brute_force_mp_oracle_full(g, model);
      double diff = 0.0;
      for (std::size_t i = 0; i < engine.prediction.size(); ++i)
        diff = std::max(diff, std::abs(engine.prediction[i] - oracle.prediction[i]));
      for (std::size_t i = 0; i < g.num_nodes(); ++i)
        for (std::size_t e = 0; e < engine.embeddings.cols(); ++e)
          diff = std::max(diff, std::abs(engine.embeddings(i, e) - oracle.embeddings[i][e]));
      std::string dense = "-";
      double ddiff = 0.0;
      if (cfg.kind == ModelKind::GCN) {
        try {
          const auto d = dense_gcn_model_oracle(DenseGraph::from_graph(g), model);
          for (std::size_t i = 0; i < d.size(); ++i)
            ddiff = std::max(ddiff, std::abs(engine.prediction[i] - d[i]));
          dense = fmt(ddiff, 9);
        } catch (const ConfigError &) {
          dense = "n/a";
        }
      }
      const bool ok = diff <= vo.tol && ddiff <= vo.tol;
      failures += !ok;
      ++checks;
      body << name << ',' << names[gi] << ',' << t << ',' << fmt(diff, 9) << ',' << dense << ','
           << (ok ? "pass" : "FAIL") << '\n';
    }
  }
  body << "# checks=" << checks << " failures=" << failures << '\n';
  emit(out, man.comment_block() + body.str());
  return failures ? 2 : 0;
}

void cmd_simulate(const GraphInputs &in, const ModelOptions &mo, ParallelOptions &po, const std::string &trace,
                  bool csv, const std::string &out) {
  Manifest man = base_manifest("simulate");
  const auto graphs = load_inputs(in, man);
  const auto cfg = make_config(mo, mo.model, graphs, man);
  const Model model = make_model(mo, cfg, man);
  const auto pc = resolve(po, man);
  sim::SimOptions opt;
  opt.trace = !trace.empty();
  const auto rep = sim::simulate(graphs.front(), model, pc, opt);
  std::ostringstream os;
  os << man.comment_block();
  if (csv) {
    os << sim::csv_header() << '\n' << sim::csv_row(rep) << '\n';
  } else {
    sim::write_text(os, rep);
    os << "bottleneck=" << dse::to_string(dse::bottleneck_report(rep).tag) << '\n';
  }
  emit(out, os.str());
  if (opt.trace) {
    std::ostringstream ts;
    ts << man.comment_block();
    sim::write_trace(ts, rep);
    emit(trace, ts.str());
  }
}

void cmd_ablate(const GraphInputs &in, const ModelOptions &mo, const std::string &depth, const std::string &out) {
  Manifest man = base_manifest("ablate");
  const auto graphs = load_inputs(in, man);
  const auto cfg = make_config(mo, mo.model, graphs, man);
  const Model model = make_model(mo, cfg, man);
  man.add("queue_depth", depth);
  for (const auto &g : graphs)
    check_compatible(g, cfg);
  const auto rows = dse::ablation(graphs, model, parse_depth(depth));
  std::ostringstream os;
  os << man.comment_block();
  dse::write_ablation_csv(os, rows);
  emit(out, os.str());
}

struct SweepOptions {
  std::vector<std::size_t> p_node{1, 2, 4}, p_edge{1, 2, 4}, p_apply{1, 2, 4}, p_scatter{1, 2, 4, 8};
  std::vector<std::string> strategies{"multiqueue"};
  std::string queue_depth = "16";
  std::size_t threads = 1;
  double threshold = dse::kQueueBoundThreshold;
};

void cmd_sweep(const GraphInputs &in, const ModelOptions &mo, const SweepOptions &so, const std::string &out) {
  Manifest man = base_manifest("sweep");
  const auto graphs = load_inputs(in, man);
  const auto cfg = make_config(mo, mo.model, graphs, man);
  const Model model = make_model(mo, cfg, man);
  for (const auto &g : graphs)
    check_compatible(g, cfg);
  dse::SweepSpec spec;
  spec.p_node = so.p_node;
  spec.p_edge = so.p_edge;
  spec.p_apply = so.p_apply;
  spec.p_scatter = so.p_scatter;
  spec.strategies.clear();
  std::string strategies;
  for (const auto &s : so.strategies) {
    spec.strategies.push_back(sim::parse_strategy(s));
    strategies += (strategies.empty() ? "" : ",") + s;
  }
  spec.queue_depth_beats = parse_depth(so.queue_depth);
  spec.threads = so.threads;
  spec.queue_bound_threshold = so.threshold;
  // thread count does not affect the output, so it stays out of the manifest
  man.add("p_node", join_sizes(so.p_node))
      .add("p_edge", join_sizes(so.p_edge))
      .add("p_apply", join_sizes(so.p_apply))
      .add("p_scatter", join_sizes(so.p_scatter))
      .add("strategies", strategies)
      .add("queue_depth", so.queue_depth)
      .add("queue_bound_threshold", fmt(so.threshold, 4));
  const auto res = dse::run_sweep(spec, graphs, model);
  std::ostringstream os;
  os << man.comment_block();
  dse::write_sweep_csv(os, res);
  emit(out, os.str());
}

void cmd_imbalance(const GraphInputs &in, const std::vector<std::size_t> &p_edges, const std::string &out) {
  Manifest man = base_manifest("imbalance");
  std::vector<std::string> names;
  const auto graphs = load_inputs(in, man, &names);
  man.add("p_edge", join_sizes(p_edges));
  std::ostringstream os;
  os << man.comment_block() << "graph,nodes,edges,p_edge,imbalance_percent\n";
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t p : p_edges) {
      if (p < 2)
        throw ConfigError("--p-edge: values must be >= 2");
      os << names[i] << ',' << graphs[i].num_nodes() << ',' << graphs[i].num_edges() << ',' << p << ','
         << fmt(workload_imbalance(graphs[i], p), 4) << '\n';
    }
  emit(out, os.str());
}

void cmd_weights(const GraphInputs &in, const ModelOptions &mo, const std::string &out) {
  Manifest man = base_manifest("weights");
  const auto graphs = load_inputs(in, man);
  const auto cfg = make_config(mo, mo.model, graphs, man);
  const Model model = make_model(mo, cfg, man);
  if (out.empty() || out == "-")
    throw ConfigError("--out: weight containers are binary; give a file path");
  std::ostringstream os;
  save_weights(os, model);
  emit(out, os.str());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"FlowGNN dataflow engine: GNN inference, oracles, cycle simulation and design-space sweeps"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string out;
  app.add_option("--out", out, "Output file (default: stdout)");

  GenOptions gen;
  auto *c_gen = app.add_subcommand("gen", "Generate a synthetic graph");
  c_gen->add_option("--nodes", gen.spec.num_nodes, "Node count")->capture_default_str();
  c_gen->add_option("--avg-degree", gen.spec.avg_degree, "Average degree")->capture_default_str();
  c_gen->add_option("--topology", gen.topology, "Topology")
      ->check(CLI::IsMember({"uniform", "power-law", "with-virtual-node"}))
      ->capture_default_str();
  c_gen->add_option("--feature-dim", gen.spec.feature_dim, "Node feature width")->capture_default_str();
  c_gen->add_option("--edge-dim", gen.spec.edge_dim, "Edge feature width")->capture_default_str();
  c_gen->add_flag("--field", gen.spec.with_field, "Attach a random node field (for DGN)");
  c_gen->add_option("--seed", gen.spec.seed, "Random seed")->required();
  c_gen->add_option("--output-format", gen.format, "Output format")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();

  GraphInputs in;
  ModelOptions mo;
  ParallelOptions po;

  auto *c_inspect = app.add_subcommand("inspect", "Print graph statistics");
  add_graph_flags(c_inspect, in, false);

  auto *c_infer = app.add_subcommand("infer", "Run a model and print its prediction");
  add_graph_flags(c_infer, in, false);
  add_model_flags(c_infer, mo);

  VerifyOptions vo;
  auto *c_verify = app.add_subcommand("verify", "Check the engine against the reference oracles");
  add_graph_flags(c_verify, in, true);
  add_model_flags(c_verify, mo, true);
  c_verify->add_option("--trials", vo.trials, "Random weight draws per model")->capture_default_str();
  c_verify->add_option("--tol", vo.tol, "Max-abs tolerance")->capture_default_str();
  c_verify->add_option("--seed", vo.seed, "Base weight seed")->capture_default_str();

  std::string trace;
  bool csv = false;
  auto *c_sim = app.add_subcommand("simulate", "Cycle-level simulation of one graph");
  add_graph_flags(c_sim, in, false);
  add_model_flags(c_sim, mo);
  add_parallel_flags(c_sim, po);
  c_sim->add_option("--trace", trace, "Write the event trace to this file");
  c_sim->add_flag("--csv", csv, "Emit a CSV row instead of key=value text");

  std::string ablate_depth = "16";
  auto *c_ablate = app.add_subcommand("ablate", "Compare the pipeline strategies");
  add_graph_flags(c_ablate, in, true);
  add_model_flags(c_ablate, mo);
  c_ablate->add_option("--queue-depth", ablate_depth, "Queue depth in beats, or 'unbounded'")->capture_default_str();

  SweepOptions so;
  auto *c_sweep = app.add_subcommand("sweep", "Design-space sweep over the parallelism factors");
  add_graph_flags(c_sweep, in, true);
  add_model_flags(c_sweep, mo);
  c_sweep->add_option("--p-node", so.p_node, "Candidate p_node values")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--p-edge", so.p_edge, "Candidate p_edge values")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--p-apply", so.p_apply, "Candidate p_apply values")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--p-scatter", so.p_scatter, "Candidate p_scatter values")
      ->delimiter(',')
      ->capture_default_str();
  c_sweep->add_option("--strategies", so.strategies, "Strategies")->delimiter(',')->capture_default_str();
  c_sweep->add_option("--queue-depth", so.queue_depth, "Queue depth in beats, or 'unbounded'")->capture_default_str();
  c_sweep->add_option("--threads", so.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  c_sweep->add_option("--queue-bound-threshold", so.threshold, "Stall fraction marking a queue-bound row")
      ->capture_default_str();

  std::vector<std::size_t> p_edges{2, 4, 8, 16, 32, 64};
  auto *c_imb = app.add_subcommand("imbalance", "MP workload imbalance per p_edge");
  add_graph_flags(c_imb, in, true);
  c_imb->add_option("--p-edge", p_edges, "p_edge values")->delimiter(',')->capture_default_str();

  auto *c_weights = app.add_subcommand("weights", "Write seeded random weights as an FGWT container");
  add_graph_flags(c_weights, in, false);
  add_model_flags(c_weights, mo);

  for (auto *sub : app.get_subcommands({}))
    sub->add_option("--out", out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_gen->parsed())
      cmd_gen((gen.out = out, gen));
    else if (c_inspect->parsed())
      cmd_inspect(in, out);
    else if (c_infer->parsed())
      cmd_infer(in, mo, out);
    else if (c_verify->parsed())
      return cmd_verify(in, mo, vo, out);
    else if (c_sim->parsed())
      cmd_simulate(in, mo, po, trace, csv, out);
    else if (c_ablate->parsed())
      cmd_ablate(in, mo, ablate_depth, out);
    else if (c_sweep->parsed())
      cmd_sweep(in, mo, so, out);
    else if (c_imb->parsed())
      cmd_imbalance(in, p_edges, out);
    else if (c_weights->parsed())
      cmd_weights(in, mo, out);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
