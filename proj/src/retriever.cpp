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
#include "hmn/retriever.hpp"

#include <numeric>

#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"

namespace hmn {

CandidateSet FullRetriever::retrieve(std::span<const double>,
                                     std::uint64_t) const {
  CandidateSet out;
  out.indices.resize(n_facts_);
  std::iota(out.indices.begin(), out.indices.end(), 0u);
  return out;
}

ExactRetriever::ExactRetriever(const MemoryMatrix& memory, std::size_t k)
    : memory_(&memory), k_(k) {
  if (k == 0 || k > memory.rows()) {
    throw ArgumentError("exact retriever: k must lie in [1, N]");
  }
}

CandidateSet ExactRetriever::retrieve(std::span<const double> query,
                                      std::uint64_t) const {
  return k_mips_exact(query, *memory_, k_);
}

}  // namespace hmn
