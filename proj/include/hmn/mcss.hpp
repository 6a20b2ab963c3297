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
#include <filesystem>
#include <span>
#include <vector>

#include "hmn/memory.hpp"

// MIPS to maximum-cosine-similarity reduction. Memory rows are scaled so the
// largest norm equals `u`, then extended with aug_terms components
// 1/2 - |x|^2, 1/2 - |x|^4, ..., 1/2 - |x|^(2^aug_terms). Queries are extended
// with zeros, so Q(q).P(x) = q.x_scaled, while |P(x)|^2 = aug_terms/4 +
// |x|^(2^(aug_terms+1)) is nearly constant across rows.

namespace hmn {

struct McssConfig {
  double u = 0.83;
  std::size_t aug_terms = 3;

  //! Throws ArgumentError unless 0 < u < 1 and aug_terms >= 1.
  void validate() const;
};

struct AugmentedMemory {
  double scale_factor = 1.0;
  std::size_t base_dim = 0;
  std::size_t aug_terms = 0;
  MemoryMatrix values;

  std::size_t aug_dim() const { return values.dim(); }
  std::size_t rows() const { return values.rows(); }
};

//! u / max_i |x_i|. Throws DegenerateInputError on an all-zero memory.
double fit_scale(const MemoryMatrix& m, const McssConfig& cfg);

//! P applied to an already-scaled vector, in double precision.
std::vector<double> augment_vector(std::span<const double> x_scaled,
                                   std::size_t aug_terms);

AugmentedMemory augment_memory(const MemoryMatrix& m, const McssConfig& cfg);

//! Q: appends aug_terms zeros. The query is not scaled.
QueryVector augment_query(std::span<const double> q, std::size_t base_dim,
                          std::size_t aug_terms);
inline QueryVector augment_query(std::span<const double> q,
                                 const McssConfig& cfg) {
  return augment_query(q, q.size(), cfg.aug_terms);
}

void encode_augmented(const AugmentedMemory& am, io::ByteWriter& out);
AugmentedMemory decode_augmented(io::ByteReader& in);
void save_augmented(const AugmentedMemory& am, const std::filesystem::path& path);
AugmentedMemory load_augmented(const std::filesystem::path& path);

}  // namespace hmn
