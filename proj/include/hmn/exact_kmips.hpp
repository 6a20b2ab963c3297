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
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "hmn/memory.hpp"

namespace hmn {

//! Top-k of (ids[i], scores[i]) pairs under ranks_before, sorted. Uses partial
//! selection; the result equals sorting everything and truncating.
CandidateSet select_top_k(std::span<const std::uint32_t> ids,
                          std::span<const double> scores, std::size_t k);

//! Brute-force K-MIPS over every memory row. Requires 1 <= k <= N.
CandidateSet k_mips_exact(std::span<const double> q, const MemoryMatrix& m,
                          std::size_t k);

}  // namespace hmn
