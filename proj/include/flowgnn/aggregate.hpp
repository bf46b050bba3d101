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

#ifndef FLOWGNN_AGGREGATE_HPP
#define FLOWGNN_AGGREGATE_HPP

#include "flowgnn/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flowgnn {

enum class AggregatorKind { Sum, Mean, Max, Min, Std };

inline AggregatorKind parse_aggregator(const std::string &s) {
  if (s == "sum") return AggregatorKind::Sum;
  if (s == "mean") return AggregatorKind::Mean;
  if (s == "max") return AggregatorKind::Max;
  if (s == "min") return AggregatorKind::Min;
  if (s == "std") return AggregatorKind::Std;
  throw ConfigError("unknown aggregator '" + s + "'");
}

inline constexpr Scalar kStdEpsilon = 1e-5f;

/// Running sum, sum of squares, max and min over a stream of vectors, stored
/// as four consecutive blocks of width dim inside caller-owned memory so that
/// message-passing units can update it in place one element at a time.
struct AggregatorState {
  static constexpr std::size_t kBlocks = 4;

  static void init(std::span<Scalar> state, std::size_t dim) {
    std::fill_n(state.begin(), 2 * dim, 0.0f);
    std::fill_n(state.begin() + 2 * dim, dim, -std::numeric_limits<Scalar>::infinity());
    std::fill_n(state.begin() + 3 * dim, dim, std::numeric_limits<Scalar>::infinity());
  }

  static void push(std::span<Scalar> state, std::size_t dim, std::size_t e, Scalar v) {
    state[e] += v;
    state[dim + e] += v * v;
    state[2 * dim + e] = std::max(state[2 * dim + e], v);
    state[3 * dim + e] = std::min(state[3 * dim + e], v);
  }

  /// Element e of the aggregate over count pushed vectors; zero when count is 0.
  static Scalar finalize(std::span<const Scalar> state, std::size_t dim, std::size_t count, AggregatorKind kind,
                         std::size_t e) {
    if (count == 0)
      return 0.0f;
    const Scalar n = static_cast<Scalar>(count);
    switch (kind) {
    case AggregatorKind::Sum: return state[e];
    case AggregatorKind::Mean: return state[e] / n;
    case AggregatorKind::Max: return state[2 * dim + e];
    case AggregatorKind::Min: return state[3 * dim + e];
    case AggregatorKind::Std: {
      const Scalar mu = state[e] / n;
      const Scalar var = state[dim + e] / n - mu * mu;
      return std::sqrt(std::max(var, 0.0f) + kStdEpsilon);
    }
    }
    return 0.0f;
  }
};

/// Aggregates rows of values (count x dim). An empty set yields zeros.
inline std::vector<Scalar> aggregate(const Matrix &values, AggregatorKind kind) {
  const std::size_t dim = values.cols();
  std::vector<Scalar> state(AggregatorState::kBlocks * dim);
  AggregatorState::init(state, dim);
  for (std::size_t r = 0; r < values.rows(); ++r)
    for (std::size_t e = 0; e < dim; ++e)
      AggregatorState::push(state, dim, e, values(r, e));
  std::vector<Scalar> out(dim);
  for (std::size_t e = 0; e < dim; ++e)
    out[e] = AggregatorState::finalize(state, dim, values.rows(), kind, e);
  return out;
}

} // namespace flowgnn

#endif
