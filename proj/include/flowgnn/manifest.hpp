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

#ifndef FLOWGNN_MANIFEST_HPP
#define FLOWGNN_MANIFEST_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowgnn {

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_digest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

/// Provenance header for generated artifacts: ordered key/value pairs with
/// input digests. Contains nothing time- or host-dependent, so identical
/// inputs give identical bytes.
class Manifest {
public:
  Manifest &add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Manifest &add_file(const std::string &key, const std::string &path) {
    return add(key, path + " fnv1a64=" + file_digest(path));
  }

  /// "key=value" lines.
  std::string text() const {
    std::string s;
    for (const auto &[k, v] : entries_)
      s += k + "=" + v + "\n";
    return s;
  }
  /// Same lines prefixed with "# " for text outputs.
  std::string comment_block() const {
    std::string s;
    for (const auto &[k, v] : entries_)
      s += "# " + k + "=" + v + "\n";
    return s;
  }

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace flowgnn

#endif
