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

#ifndef FLOWGNN_GRAPH_IO_HPP
#define FLOWGNN_GRAPH_IO_HPP

#include "flowgnn/graph.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace flowgnn {

enum class GraphFormat { Text, Binary };

inline constexpr char kGraphMagic[4] = {'F', 'G', 'N', 'N'};
inline constexpr std::uint16_t kGraphVersion = 1;
inline constexpr char kManifestMagic[4] = {'F', 'G', 'M', 'F'};

namespace io {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ','))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != ',')
      ++j;
    if (j > i)
      out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T> T parse_number(std::string_view tok, std::size_t line_no, const char *what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw FormatError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                      std::string(tok) + "'");
  return value;
}

inline std::string format_scalar(Scalar v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Little-endian helpers independent of host byte order.
inline void put_u16(std::ostream &os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}
inline void put_u32(std::ostream &os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}
inline void put_f32(std::ostream &os, Scalar v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

class ByteReader {
public:
  explicit ByteReader(std::istream &is) : is_(is) {}

  void read(char *dst, std::size_t n, const char *what) {
    is_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n)
      throw FormatError("byte " + std::to_string(offset_) + ": truncated stream while reading " + what);
    offset_ += n;
  }
  std::uint16_t u16(const char *what) {
    unsigned char b[2];
    read(reinterpret_cast<char *>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char *what) {
    unsigned char b[4];
    read(reinterpret_cast<char *>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  Scalar f32(const char *what) { return std::bit_cast<Scalar>(u32(what)); }
  std::size_t offset() const { return offset_; }
  bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }

private:
  std::istream &is_;
  std::size_t offset_ = 0;
};

} // namespace io

/// Parses the line-oriented text format:
///   [# comment lines]
///   N M F_in D [V]
///   M lines "src dst f_1 ... f_D"
///   N lines "x_1 ... x_F_in"
///   [#field, then N lines with one value each]
inline Graph load_graph_text(std::istream &is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const char *what) -> std::vector<std::string_view> {
    while (std::getline(is, line)) {
      ++line_no;
      auto toks = io::split_ws(line);
      if (!toks.empty())
        return toks;
    }
    throw FormatError("line " + std::to_string(line_no + 1) + ": unexpected end of stream, expected " + what);
  };

  std::vector<std::string_view> header;
  for (;;) {
    header = next_line("header");
    if (header[0].front() != '#')
      break;
  }
  if (header.size() != 4 && header.size() != 5)
    throw FormatError("line " + std::to_string(line_no) + ": malformed header, expected 'N M F_in D [V]'");
  const std::size_t header_line = line_no;
  const auto n = io::parse_number<std::uint32_t>(header[0], line_no, "N");
  const auto m = io::parse_number<std::uint32_t>(header[1], line_no, "M");
  const auto f_in = io::parse_number<std::uint32_t>(header[2], line_no, "F_in");
  const auto d = io::parse_number<std::uint32_t>(header[3], line_no, "D");
  bool vn = false;
  if (header.size() == 5) {
    const auto flag = io::parse_number<std::uint32_t>(header[4], line_no, "V");
    if (flag > 1)
      throw FormatError("line " + std::to_string(line_no) + ": malformed header, V must be 0 or 1");
    vn = flag == 1;
  }
  if (vn && n == 0)
    throw FormatError("line " + std::to_string(header_line) + ": virtual node flag with N=0");

  std::vector<Edge> coo(m);
  Matrix ef(d > 0 ? m : 0, d);
  for (std::uint32_t k = 0; k < m; ++k) {
    auto toks = next_line("edge line");
    if (toks.size() != 2 + d)
      throw FormatError("line " + std::to_string(line_no) + ": edge line has " + std::to_string(toks.size()) +
                        " fields, expected " + std::to_string(2 + d));
    coo[k].src = io::parse_number<std::uint32_t>(toks[0], line_no, "src");
    coo[k].dst = io::parse_number<std::uint32_t>(toks[1], line_no, "dst");
    if (coo[k].src >= n || coo[k].dst >= n)
      throw FormatError("line " + std::to_string(line_no) + ": edge (" + std::to_string(coo[k].src) + "," +
                        std::to_string(coo[k].dst) + ") index out of range for N=" + std::to_string(n));
    for (std::uint32_t j = 0; j < d; ++j)
      ef(k, j) = io::parse_number<Scalar>(toks[2 + j], line_no, "edge feature");
  }

  Matrix x(n, f_in);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto toks = next_line("node feature line");
    if (toks.size() != f_in)
      throw FormatError("line " + std::to_string(line_no) + ": node feature row has " +
                        std::to_string(toks.size()) + " values, expected " + std::to_string(f_in));
    for (std::uint32_t j = 0; j < f_in; ++j)
      x(i, j) = io::parse_number<Scalar>(toks[j], line_no, "node feature");
  }

  std::vector<Scalar> field;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = io::split_ws(line);
    if (toks.empty())
      continue;
    if (toks.size() != 1 || toks[0] != "#field")
      throw FormatError("line " + std::to_string(line_no) + ": unexpected trailing content (feature-row count mismatch?)");
    field.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      auto ft = next_line("node field line");
      if (ft.size() != 1)
        throw FormatError("line " + std::to_string(line_no) + ": node field line must hold one value");
      field.push_back(io::parse_number<Scalar>(ft[0], line_no, "node field"));
    }
    while (std::getline(is, line)) {
      ++line_no;
      if (!io::split_ws(line).empty())
        throw FormatError("line " + std::to_string(line_no) + ": unexpected content after node field");
    }
    break;
  }
  return Graph(n, std::move(coo), std::move(x), std::move(ef), std::move(field), vn);
}

inline void save_graph_text(std::ostream &os, const Graph &g, std::string_view comment = {}) {
  if (!comment.empty()) {
    std::istringstream cs{std::string(comment)};
    std::string line;
    while (std::getline(cs, line))
      os << "# " << line << '\n';
  }
  os << g.num_nodes() << ' ' << g.num_edges() << ' ' << g.feature_dim() << ' ' << g.edge_dim();
  if (g.has_virtual_node())
    os << " 1";
  os << '\n';
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    os << g.coo()[k].src << ' ' << g.coo()[k].dst;
    for (std::size_t j = 0; j < g.edge_dim(); ++j)
      os << ' ' << io::format_scalar(g.edge_features()(k, j));
    os << '\n';
  }
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    for (std::size_t j = 0; j < g.feature_dim(); ++j)
      os << (j ? " " : "") << io::format_scalar(g.node_features()(i, j));
    os << '\n';
  }
  if (g.has_node_field()) {
    os << "#field\n";
    for (Scalar v : g.node_field())
      os << io::format_scalar(v) << '\n';
  }
}

/// Binary layout (little-endian): "FGNN", u16 version, u32 N, M, F_in, D,
/// u32 flags (bit0 virtual node, bit1 node field), then M x (u32 src, u32 dst,
/// D x f32), N x F_in f32, optional N f32 field, optional "FGMF" u32 length
/// + manifest text trailer.
inline Graph load_graph_binary(std::istream &is) {
  io::ByteReader r(is);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kGraphMagic, 4) != 0)
    throw FormatError("byte 0: bad magic, expected 'FGNN'");
  const auto version = r.u16("version");
  if (version != kGraphVersion)
    throw FormatError("byte 4: unsupported version " + std::to_string(version));
  const auto n = r.u32("N");
  const auto m = r.u32("M");
  const auto f_in = r.u32("F_in");
  const auto d = r.u32("D");
  const std::size_t flags_at = r.offset();
  const auto flags = r.u32("flags");
  if (flags > 3)
    throw FormatError("byte " + std::to_string(flags_at) + ": malformed header flags");
  std::vector<Edge> coo(m);
  Matrix ef(d > 0 ? m : 0, d);
  for (std::uint32_t k = 0; k < m; ++k) {
    const std::size_t at = r.offset();
    coo[k].src = r.u32("src");
    coo[k].dst = r.u32("dst");
    if (coo[k].src >= n || coo[k].dst >= n)
      throw FormatError("byte " + std::to_string(at) + ": edge index out of range for N=" + std::to_string(n));
    for (std::uint32_t j = 0; j < d; ++j)
      ef(k, j) = r.f32("edge feature");
  }
  Matrix x(n, f_in);
  for (auto &v : x.data())
    v = r.f32("node feature");
  std::vector<Scalar> field;
  if (flags & 2u) {
    field.resize(n);
    for (auto &v : field)
      v = r.f32("node field");
  }
  if (!r.at_end()) {
    const std::size_t at = r.offset();
    r.read(magic, 4, "trailer");
    if (std::memcmp(magic, kManifestMagic, 4) != 0)
      throw FormatError("byte " + std::to_string(at) + ": unexpected trailing bytes");
    std::string text(r.u32("manifest length"), '\0');
    r.read(text.data(), text.size(), "manifest");
  }
  return Graph(n, std::move(coo), std::move(x), std::move(ef), std::move(field), (flags & 1u) != 0);
}

inline void save_graph_binary(std::ostream &os, const Graph &g, std::string_view manifest = {}) {
  os.write(kGraphMagic, 4);
  io::put_u16(os, kGraphVersion);
  io::put_u32(os, static_cast<std::uint32_t>(g.num_nodes()));
  io::put_u32(os, static_cast<std::uint32_t>(g.num_edges()));
  io::put_u32(os, static_cast<std::uint32_t>(g.feature_dim()));
  io::put_u32(os, static_cast<std::uint32_t>(g.edge_dim()));
  io::put_u32(os, (g.has_virtual_node() ? 1u : 0u) | (g.has_node_field() ? 2u : 0u));
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    io::put_u32(os, g.coo()[k].src);
    io::put_u32(os, g.coo()[k].dst);
    for (std::size_t j = 0; j < g.edge_dim(); ++j)
      io::put_f32(os, g.edge_features()(k, j));
  }
  for (Scalar v : g.node_features().data())
    io::put_f32(os, v);
  for (Scalar v : g.node_field())
    io::put_f32(os, v);
  if (!manifest.empty()) {
    os.write(kManifestMagic, 4);
    io::put_u32(os, static_cast<std::uint32_t>(manifest.size()));
    os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  }
}

inline Graph load_graph(std::istream &is, GraphFormat fmt) {
  return fmt == GraphFormat::Text ? load_graph_text(is) : load_graph_binary(is);
}

inline void save_graph(std::ostream &os, const Graph &g, GraphFormat fmt, std::string_view manifest = {}) {
  if (fmt == GraphFormat::Text)
    save_graph_text(os, g, manifest);
  else
    save_graph_binary(os, g, manifest);
}

/// Plain two-column edge list ("a b" per line, '#' or '%' comments), e.g. the
/// citation datasets. IDs are kept when they already form 0..K-1; otherwise
/// they are compacted preserving numeric order. Edges keep file order. Node
/// features are a single constant column.
inline Graph load_edge_list(std::istream &is) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = io::split_ws(line);
    if (toks.empty() || toks[0].front() == '#' || toks[0].front() == '%')
      continue;
    if (toks.size() < 2)
      throw FormatError("line " + std::to_string(line_no) + ": edge list line needs two ids");
    raw.emplace_back(io::parse_number<std::uint64_t>(toks[0], line_no, "id"),
                     io::parse_number<std::uint64_t>(toks[1], line_no, "id"));
  }
  std::map<std::uint64_t, NodeId> ids;
  for (auto [a, b] : raw) {
    ids.emplace(a, 0);
    ids.emplace(b, 0);
  }
  const bool dense = ids.empty() || (ids.begin()->first == 0 && ids.rbegin()->first + 1 == ids.size());
  NodeId next = 0;
  for (auto &[id, idx] : ids)
    idx = dense ? static_cast<NodeId>(id) : next++;
  std::vector<Edge> coo;
  coo.reserve(raw.size());
  for (auto [a, b] : raw)
    coo.push_back({ids[a], ids[b]});
  return Graph(ids.size(), std::move(coo), Matrix(ids.size(), 1, 1.0f));
}

/// Loads a graph file, detecting binary files by their magic bytes.
inline Graph load_graph_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open graph file '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kGraphMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return load_graph(in, binary ? GraphFormat::Binary : GraphFormat::Text);
}

} // namespace flowgnn

#endif
