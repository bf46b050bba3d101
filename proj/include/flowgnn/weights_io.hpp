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

#ifndef FLOWGNN_WEIGHTS_IO_HPP
#define FLOWGNN_WEIGHTS_IO_HPP

#include "flowgnn/graph_io.hpp"
#include "flowgnn/model.hpp"

#include <fstream>
#include <map>

namespace flowgnn {

inline constexpr char kWeightMagic[4] = {'F', 'G', 'W', 'T'};
inline constexpr std::uint16_t kWeightVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<Scalar> values;
};

namespace detail {

/// Visits every tensor of a model with its canonical name, in file order.
/// Names: layer{l}.weight|bias, layer{l}.mlp{0,1}.weight|bias,
/// layer{l}.edge_enc.weight|bias, layer{l}.eps, layer{l}.att_target,
/// layer{l}.att_neighbor, vn{l}.mlp{0,1}.weight|bias, head{k}.weight|bias.
template <typename Model_, typename Fn> void for_each_tensor(Model_ &m, Fn &&fn) {
  auto linear = [&](auto &lin, const std::string &prefix) {
    fn(prefix + ".weight", lin.weight);
    fn(prefix + ".bias", lin.bias);
  };
  const auto &c = m.config;
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    auto &p = m.layers[l];
    const std::string t = "layer" + std::to_string(l);
    switch (c.kind) {
    case ModelKind::GCN: fn(t + ".weight", p.linear.weight); break;
    case ModelKind::GAT:
      fn(t + ".weight", p.linear.weight);
      fn(t + ".att_target", p.att_target);
      fn(t + ".att_neighbor", p.att_neighbor);
      break;
    case ModelKind::GIN:
      linear(p.mlp0, t + ".mlp0");
      linear(p.mlp1, t + ".mlp1");
      fn(t + ".eps", p.epsilon);
      break;
    case ModelKind::PNA:
    case ModelKind::DGN: linear(p.linear, t); break;
    }
    if (c.uses_edge_features() && c.edge_dim > 0)
      linear(p.edge_encoder, t + ".edge_enc");
    if (c.virtual_node && l + 1 < c.num_layers) {
      linear(p.vn_mlp0, "vn" + std::to_string(l) + ".mlp0");
      linear(p.vn_mlp1, "vn" + std::to_string(l) + ".mlp1");
    }
  }
  for (std::size_t k = 0; k < m.head.size(); ++k)
    linear(m.head[k], "head" + std::to_string(k));
}

} // namespace detail

inline void save_weights(std::ostream &os, const Model &model) {
  std::vector<std::pair<std::string, Tensor>> tensors;
  struct Collect {
    std::vector<std::pair<std::string, Tensor>> &out;
    void operator()(const std::string &name, const Matrix &m) const {
      out.push_back({name, {{static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, m.data()}});
    }
    void operator()(const std::string &name, const std::vector<Scalar> &v) const {
      out.push_back({name, {{static_cast<std::uint32_t>(v.size())}, v}});
    }
    void operator()(const std::string &name, const Scalar &s) const { out.push_back({name, {{1}, {s}}}); }
  };
  detail::for_each_tensor(model, Collect{tensors});
  os.write(kWeightMagic, 4);
  io::put_u16(os, kWeightVersion);
  io::put_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto &[name, t] : tensors) {
    io::put_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(t.dims.size()));
    for (auto d : t.dims)
      io::put_u32(os, d);
    for (Scalar v : t.values)
      io::put_f32(os, v);
  }
}

inline std::map<std::string, Tensor> read_tensors(std::istream &is) {
  io::ByteReader r(is);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kWeightMagic, 4) != 0)
    throw FormatError("byte 0: bad magic, expected 'FGWT'");
  const auto version = r.u16("version");
  if (version != kWeightVersion)
    throw FormatError("byte 4: unsupported weight version " + std::to_string(version));
  const auto count = r.u32("tensor count");
  std::map<std::string, Tensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    std::string name(r.u16("name length"), '\0');
    r.read(name.data(), name.size(), "tensor name");
    char rank = 0;
    r.read(&rank, 1, "rank");
    Tensor t;
    std::size_t numel = 1;
    for (int d = 0; d < static_cast<unsigned char>(rank); ++d) {
      t.dims.push_back(r.u32("dim"));
      numel *= t.dims.back();
    }
    if (numel > (std::size_t{1} << 31))
      throw FormatError("byte " + std::to_string(at) + ": tensor '" + name + "' is implausibly large");
    t.values.resize(numel);
    for (auto &v : t.values)
      v = r.f32("tensor payload");
    if (!out.emplace(name, std::move(t)).second)
      throw FormatError("byte " + std::to_string(at) + ": duplicate tensor '" + name + "'");
  }
  return out;
}

/// Reads a weight container and binds it to `config`, validating every shape.
inline Model load_weights(std::istream &is, const ModelConfig &config) {
  config.validate();
  auto tensors = read_tensors(is);
  Model m = random_model(config, 0); // shape template; every tensor is overwritten
  struct Bind {
    std::map<std::string, Tensor> &in;
    const Tensor &take(const std::string &name, std::vector<std::uint32_t> dims) const {
      auto it = in.find(name);
      if (it == in.end())
        throw FormatError("weight tensor '" + name + "' missing");
      if (it->second.dims != dims) {
        std::string got, want;
        for (auto d : it->second.dims)
          got += (got.empty() ? "" : "x") + std::to_string(d);
        for (auto d : dims)
          want += (want.empty() ? "" : "x") + std::to_string(d);
        throw FormatError("weight tensor '" + name + "' has shape " + got + ", expected " + want);
      }
      return it->second;
    }
    void operator()(const std::string &name, Matrix &mat) const {
      mat.data() = take(name, {static_cast<std::uint32_t>(mat.rows()), static_cast<std::uint32_t>(mat.cols())}).values;
      in.erase(name);
    }
    void operator()(const std::string &name, std::vector<Scalar> &v) const {
      v = take(name, {static_cast<std::uint32_t>(v.size())}).values;
      in.erase(name);
    }
    void operator()(const std::string &name, Scalar &s) const {
      s = take(name, {1}).values[0];
      in.erase(name);
    }
  };
  detail::for_each_tensor(m, Bind{tensors});
  if (!tensors.empty())
    throw FormatError("unexpected weight tensor '" + tensors.begin()->first + "' for a " + config.name() +
                      " model");
  m.validate();
  return m;
}

inline Model load_weights_file(const std::string &path, const ModelConfig &config) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open weight file '" + path + "'");
  return load_weights(in, config);
}

} // namespace flowgnn

#endif
