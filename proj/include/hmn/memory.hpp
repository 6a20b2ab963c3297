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
#include <filesystem>
#include <span>
#include <vector>

#include "hmn/binary_io.hpp"

namespace hmn {

//! Dense fact memory, N rows by d columns, row-major binary32.
//! Immutable after construction; safe for concurrent readers.
class MemoryMatrix {
 public:
  //! Validates shape (N >= 1, d >= 1, |values| = N*d) and finiteness.
  MemoryMatrix(std::size_t n_facts, std::size_t dim, std::vector<float> values);

  std::size_t rows() const { return n_facts_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const { return values_; }
  const float* data() const { return values_.data(); }

  friend bool operator==(const MemoryMatrix&, const MemoryMatrix&) = default;

 private:
  std::size_t n_facts_;
  std::size_t dim_;
  std::vector<float> values_;
};

//! Query representation h(q); values are double precision.
struct QueryVector {
  std::vector<double> values;

  QueryVector() = default;
  explicit QueryVector(std::vector<double> v) : values(std::move(v)) {}
  explicit QueryVector(std::size_t dim) : values(dim, 0.0) {}

  std::size_t dim() const { return values.size(); }
  operator std::span<const double>() const { return values; }
};

//! Retrieved memory row ids, optionally with their inner products.
//! When scored, entries are ordered by descending score, ties to lower index.
struct CandidateSet {
  std::vector<std::uint32_t> indices;
  std::vector<double> scores;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool scored() const { return !indices.empty() && scores.size() == indices.size(); }
};

//! Strict total order used for every ranking: higher score first, then lower
//! index.
inline bool ranks_before(double score_a, std::uint32_t idx_a, double score_b,
                         std::uint32_t idx_b) {
  if (score_a != score_b) return score_a > score_b;
  return idx_a < idx_b;
}

//! Encodes a matrix into HMNM bytes (16-byte header + payload).
void encode_memory(const MemoryMatrix& m, io::ByteWriter& out);
//! Decodes one HMNM record starting at the reader position.
MemoryMatrix decode_memory(io::ByteReader& in);

MemoryMatrix load_memory(const std::filesystem::path& path);
void save_memory(const MemoryMatrix& m, const std::filesystem::path& path);

//! s_j = q . M[idx_j], in the order of idx. Throws BoundsError on a bad index
//! and ArgumentError on a dimension mismatch.
std::vector<double> score_subset(std::span<const double> q,
                                 const MemoryMatrix& m,
                                 std::span<const std::uint32_t> idx);

//! Scores every row: s_i = q . M[i].
std::vector<double> score_all(std::span<const double> q, const MemoryMatrix& m);

}  // namespace hmn
