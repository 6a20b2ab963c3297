// Copyright 2026 The HMN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "hmn/exact_kmips.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hmn/error.hpp"

namespace hmn {

CandidateSet select_top_k(std::span<const std::uint32_t> ids,
                          std::span<const double> scores, std::size_t k) {
  if (ids.size() != scores.size()) {
    throw ArgumentError("select_top_k: ids and scores differ in length");
  }
  k = std::min(k, ids.size());
  std::vector<std::uint32_t> pos(ids.size());
  std::iota(pos.begin(), pos.end(), 0u);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    return ranks_before(scores[a], ids[a], scores[b], ids[b]);
  };
  if (k < pos.size()) {
    std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k),
                     pos.end(), before);
    pos.resize(k);
  }
  std::sort(pos.begin(), pos.end(), before);

  CandidateSet out;
  out.indices.reserve(k);
  out.scores.reserve(k);
  for (std::uint32_t p : pos) {
    out.indices.push_back(ids[p]);
    out.scores.push_back(scores[p]);
  }
  return out;
}

CandidateSet k_mips_exact(std::span<const double> q, const MemoryMatrix& m,
                          std::size_t k) {
  if (k == 0 || k > m.rows()) {
    throw ArgumentError("k_mips_exact: k=" + std::to_string(k) +
                        " outside [1, " + std::to_string(m.rows()) + "]");
  }
  const std::vector<double> scores = score_all(q, m);
  std::vector<std::uint32_t> ids(m.rows());
  std::iota(ids.begin(), ids.end(), 0u);
  return select_top_k(ids, scores, k);
}

}  // namespace hmn
