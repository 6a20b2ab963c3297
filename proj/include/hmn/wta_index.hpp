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
#include <unordered_map>
#include <vector>

#include "hmn/mcss.hpp"
#include "hmn/retriever.hpp"

namespace hmn {

//! Winner-takes-all hashing over an augmented memory. Hash function h uses
//! perms_per_hash permutations; each contributes one digit, the position of
//! the maximum among the first prefix_len permuted coordinates.
struct WtaIndex {
  std::size_t n_hashes = 0;
  std::size_t perms_per_hash = 0;
  std::size_t prefix_len = 0;
  std::size_t aug_dim = 0;
  std::size_t n_facts = 0;
  std::uint64_t seed = 0;
  //! (n_hashes * perms_per_hash) permutations of {0..aug_dim-1}, row-major.
  std::vector<std::uint32_t> permutations;
  //! One table per hash function: packed code -> ascending row ids.
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables;

  std::span<const std::uint32_t> permutation(std::size_t hash, std::size_t p) const {
    return {permutations.data() + (hash * perms_per_hash + p) * aug_dim, aug_dim};
  }
};

struct WtaBuildOptions {
  std::size_t n_hashes = 16;
  std::size_t perms_per_hash = 4;
  std::size_t prefix_len = 4;
  std::uint64_t seed = 0;
};

//! Bits per digit, ceil(log2(prefix_len)).
std::size_t wta_digit_bits(std::size_t prefix_len);

//! One digit per permutation: argmax position within the permuted prefix,
//! ties to the lowest position.
std::vector<std::uint32_t> wta_code(std::span<const double> x,
                                    std::span<const std::span<const std::uint32_t>> perms,
                                    std::size_t prefix_len);

std::uint64_t pack_wta_code(std::span<const std::uint32_t> digits,
                            std::size_t prefix_len);

WtaIndex build_wta_index(const AugmentedMemory& am, const WtaBuildOptions& opts);

//! Union of the query's buckets over all tables. With multi_probe, widens to
//! Hamming-1 neighbours (one digit replaced by the runner-up position) until
//! `budget` is met. Truncated to `budget` in first-found order.
CandidateSet retrieve_wta(const WtaIndex& idx, std::span<const double> q_aug,
                          std::size_t budget, bool multi_probe = true);

void encode_wta_index(const WtaIndex& idx, io::ByteWriter& out);
WtaIndex decode_wta_index(io::ByteReader& in);
void save_wta_index(const WtaIndex& idx, const std::filesystem::path& path);
WtaIndex load_wta_index(const std::filesystem::path& path);

class WtaRetriever final : public Retriever {
 public:
  WtaRetriever(const WtaIndex& idx, std::size_t base_dim, std::size_t budget,
               bool multi_probe = true);
  CandidateSet retrieve(std::span<const double> query,
                        std::uint64_t stream) const override;
  std::string name() const override { return "wta"; }

 private:
  const WtaIndex* idx_;
  std::size_t base_dim_;
  std::size_t budget_;
  bool multi_probe_;
};

}  // namespace hmn
