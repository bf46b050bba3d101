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

// Generate a small molecule-sized graph, run GIN on it, then replay the same
// inference on the cycle model under each pipeline strategy.

#include "flowgnn/kernels.hpp"
#include "flowgnn/simulator.hpp"
#include "flowgnn/synthetic.hpp"

#include <iostream>

int main() {
  using namespace flowgnn;

  SyntheticSpec spec;
  spec.num_nodes = 26;
  spec.avg_degree = 2.2;
  spec.feature_dim = 9;
  spec.edge_dim = 3;
  spec.seed = 1;
  const Graph g = gen_synthetic(spec);

  const Model model = random_model(preset("gin", g.feature_dim(), g.edge_dim()), 0);
  std::cout << "gin prediction: " << run_model(g, model)[0] << "\n";

  for (auto s : {sim::PipelineStrategy::NonPipelined, sim::PipelineStrategy::FixedPipeline,
                 sim::PipelineStrategy::BaselineDataflow, sim::PipelineStrategy::MultiQueueDataflow}) {
    sim::ParallelismConfig pc;
    pc.strategy = s;
    if (s != sim::PipelineStrategy::MultiQueueDataflow)
      pc.p_node = pc.p_edge = 1;
    const auto r = sim::simulate(g, model, pc);
    std::cout << sim::to_string(s) << ": " << r.total_cycles << " cycles, prediction " << r.prediction[0] << "\n";
  }
}
