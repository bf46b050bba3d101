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

#ifndef FLOWGNN_SIM_BUFFERS_HPP
#define FLOWGNN_SIM_BUFFERS_HPP

#include "flowgnn/types.hpp"

namespace flowgnn::sim {

/// Two N x F_msg message banks used alternately: MP writes partial aggregates
/// of the current layer into the write side while NT reads the previous
/// layer's aggregates from the read side. Storage never depends on the edge count.
class MessageBufferPair {
public:
  MessageBufferPair(std::size_t num_nodes, std::size_t width)
      : banks_{Matrix(num_nodes, width), Matrix(num_nodes, width)} {
    allocated_ = 2 * num_nodes * width;
    peak_ = allocated_;
  }

  std::size_t width() const { return banks_[0].cols(); }
  std::size_t read_index() const { return read_; }
  std::size_t write_index() const { return 1 - read_; }

  std::span<const Scalar> read_row(NodeId v, std::size_t used) const { return banks_[read_].row(v).first(used); }
  std::span<Scalar> write_row(NodeId v, std::size_t used) { return banks_[1 - read_].row(v).first(used); }

  void swap() { read_ = 1 - read_; }

  std::size_t allocated_scalars() const { return allocated_; }
  std::size_t peak_scalars() const { return peak_; }

private:
  Matrix banks_[2];
  std::size_t read_ = 0;
  std::size_t allocated_ = 0;
  std::size_t peak_ = 0;
};

} // namespace flowgnn::sim

#endif
