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
#include "hmn/wta_index.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "hmn/error.hpp"
#include "hmn/rng.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNW";
constexpr std::uint32_t kVersion = 1;

struct PrefixRank {
  std::uint32_t winner;
  std::uint32_t runner_up;
};

PrefixRank rank_prefix(std::span<const double> x, std::span<const std::uint32_t> perm,
                       std::size_t prefix_len) {
  std::uint32_t best = 0;
  for (std::uint32_t p = 1; p < prefix_len; ++p) {
    if (x[perm[p]] > x[perm[best]]) best = p;
  }
  std::uint32_t second = best == 0 ? 1 : 0;
  for (std::uint32_t p = 0; p < prefix_len; ++p) {
    if (p != best && x[perm[p]] > x[perm[second]]) second = p;
  }
  return {best, second};
}

void validate_options(const WtaBuildOptions& o, std::size_t aug_dim) {
  if (o.n_hashes < 1) throw ArgumentError("n_hashes must be >= 1");
  if (o.perms_per_hash < 1) throw ArgumentError("perms_per_hash must be >= 1");
  if (o.prefix_len < 2 || o.prefix_len > aug_dim) {
    throw ArgumentError("prefix_len must lie in [2, dim], got " +
                        std::to_string(o.prefix_len));
  }
  if (o.perms_per_hash * wta_digit_bits(o.prefix_len) > 64) {
    throw ArgumentError("perms_per_hash * digit bits must fit in 64 bits");
  }
}

}  // namespace

std::size_t wta_digit_bits(std::size_t prefix_len) {
  return prefix_len <= 1 ? 0 : std::bit_width(prefix_len - 1);
}

std::vector<std::uint32_t> wta_code(std::span<const double> x,
                                    std::span<const std::span<const std::uint32_t>> perms,
                                    std::size_t prefix_len) {
  if (prefix_len > x.size()) {
    throw ArgumentError("prefix_len " + std::to_string(prefix_len) +
                        " exceeds vector dim " + std::to_string(x.size()));
  }
  if (prefix_len < 1) throw ArgumentError("prefix_len must be >= 1");
  std::vector<std::uint32_t> digits;
  digits.reserve(perms.size());
  for (const auto& perm : perms) {
    std::uint32_t best = 0;
    for (std::uint32_t p = 1; p < prefix_len; ++p) {
      if (x[perm[p]] > x[perm[best]]) best = p;
    }
    digits.push_back(best);
  }
  return digits;
}

std::uint64_t pack_wta_code(std::span<const std::uint32_t> digits,
                            std::size_t prefix_len) {
  const std::size_t bits = wta_digit_bits(prefix_len);
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    key |= static_cast<std::uint64_t>(digits[i]) << (i * bits);
  }
  return key;
}

WtaIndex build_wta_index(const AugmentedMemory& am, const WtaBuildOptions& opts) {
  const std::size_t dim = am.aug_dim();
  validate_options(opts, dim);

  WtaIndex idx;
  idx.n_hashes = opts.n_hashes;
  idx.perms_per_hash = opts.perms_per_hash;
  idx.prefix_len = opts.prefix_len;
  idx.aug_dim = dim;
  idx.n_facts = am.rows();
  idx.seed = opts.seed;

  Rng rng(mix_seed(opts.seed, 0x777461ULL));
  const std::size_t n_perms = opts.n_hashes * opts.perms_per_hash;
  idx.permutations.resize(n_perms * dim);
  for (std::size_t p = 0; p < n_perms; ++p) {
    auto first = idx.permutations.begin() + static_cast<std::ptrdiff_t>(p * dim);
    std::iota(first, first + static_cast<std::ptrdiff_t>(dim), 0u);
    rng.shuffle(first, first + static_cast<std::ptrdiff_t>(dim));
  }

  idx.tables.resize(opts.n_hashes);
  std::vector<double> x(dim);
  std::vector<std::uint32_t> digits(opts.perms_per_hash);
  for (std::uint32_t i = 0; i < am.rows(); ++i) {
    const auto row = am.values.row(i);
    std::copy(row.begin(), row.end(), x.begin());
    for (std::size_t h = 0; h < opts.n_hashes; ++h) {
      for (std::size_t p = 0; p < opts.perms_per_hash; ++p) {
        digits[p] = rank_prefix(x, idx.permutation(h, p), opts.prefix_len).winner;
      }
      idx.tables[h][pack_wta_code(digits, opts.prefix_len)].push_back(i);
    }
  }
  return idx;
}

CandidateSet retrieve_wta(const WtaIndex& idx, std::span<const double> q_aug,
                          std::size_t budget, bool multi_probe) {
  if (q_aug.size() != idx.aug_dim) {
    throw ArgumentError("query dim " + std::to_string(q_aug.size()) +
                        " does not match index dim " + std::to_string(idx.aug_dim));
  }
  if (budget < 1) throw ArgumentError("budget must be >= 1");

  const std::size_t pph = idx.perms_per_hash;
  std::vector<PrefixRank> ranks(idx.n_hashes * pph);
  std::vector<std::uint64_t> codes(idx.n_hashes);
  std::vector<std::uint32_t> digits(pph);
  for (std::size_t h = 0; h < idx.n_hashes; ++h) {
    for (std::size_t p = 0; p < pph; ++p) {
      ranks[h * pph + p] = rank_prefix(q_aug, idx.permutation(h, p), idx.prefix_len);
      digits[p] = ranks[h * pph + p].winner;
    }
    codes[h] = pack_wta_code(digits, idx.prefix_len);
  }

  CandidateSet out;
  std::vector<std::uint8_t> seen(idx.n_facts, 0);
  auto probe = [&](std::size_t h, std::uint64_t code) {
    const auto it = idx.tables[h].find(code);
    if (it == idx.tables[h].end()) return;
    for (std::uint32_t i : it->second) {
      if (out.indices.size() >= budget) return;
      if (!seen[i]) {
        seen[i] = 1;
        out.indices.push_back(i);
      }
    }
  };

  for (std::size_t h = 0; h < idx.n_hashes && out.size() < budget; ++h) {
    probe(h, codes[h]);
  }
  if (!multi_probe) return out;

  const std::size_t bits = wta_digit_bits(idx.prefix_len);
  const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
  for (std::size_t h = 0; h < idx.n_hashes && out.size() < budget; ++h) {
    for (std::size_t p = 0; p < pph && out.size() < budget; ++p) {
      const std::uint64_t shift = p * bits;
      const std::uint64_t alt =
          (codes[h] & ~(mask << shift)) |
          (static_cast<std::uint64_t>(ranks[h * pph + p].runner_up) << shift);
      probe(h, alt);
    }
  }
  return out;
}

void encode_wta_index(const WtaIndex& idx, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(idx.n_hashes));
  out.u32(static_cast<std::uint32_t>(idx.perms_per_hash));
  out.u32(static_cast<std::uint32_t>(idx.prefix_len));
  out.u32(static_cast<std::uint32_t>(idx.aug_dim));
  out.u64(idx.seed);
  out.u32s(idx.permutations);
  for (const auto& table : idx.tables) {
    std::vector<std::uint64_t> keys;
    keys.reserve(table.size());
    for (const auto& kv : table) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    out.u32(static_cast<std::uint32_t>(keys.size()));
    for (std::uint64_t k : keys) {
      const auto& ids = table.at(k);
      out.u64(k);
      out.u32(static_cast<std::uint32_t>(ids.size()));
      out.u32s(ids);
    }
  }
}

WtaIndex decode_wta_index(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  WtaIndex idx;
  idx.n_hashes = in.u32();
  idx.perms_per_hash = in.u32();
  idx.prefix_len = in.u32();
  idx.aug_dim = in.u32();
  idx.seed = in.u64();
  if (idx.aug_dim == 0) throw FormatError("HMNW: zero dimension");
  validate_options({idx.n_hashes, idx.perms_per_hash, idx.prefix_len, idx.seed},
                   idx.aug_dim);
  idx.permutations.resize(idx.n_hashes * idx.perms_per_hash * idx.aug_dim);
  in.u32s(idx.permutations);
  for (std::size_t p = 0; p < idx.n_hashes * idx.perms_per_hash; ++p) {
    std::vector<std::uint8_t> hit(idx.aug_dim, 0);
    for (std::size_t j = 0; j < idx.aug_dim; ++j) {
      const std::uint32_t v = idx.permutations[p * idx.aug_dim + j];
      if (v >= idx.aug_dim || hit[v]) {
        throw ValidationError("HMNW: permutation is not a bijection");
      }
      hit[v] = 1;
    }
  }
  idx.tables.resize(idx.n_hashes);
  for (std::size_t h = 0; h < idx.n_hashes; ++h) {
    const std::uint32_t n_buckets = in.u32();
    std::size_t total = 0;
    for (std::uint32_t b = 0; b < n_buckets; ++b) {
      const std::uint64_t code = in.u64();
      const std::uint32_t count = in.u32();
      std::vector<std::uint32_t> ids(count);
      in.u32s(ids);
      total += count;
      idx.tables[h].emplace(code, std::move(ids));
    }
    if (h == 0) {
      idx.n_facts = total;
    } else if (total != idx.n_facts) {
      throw ValidationError("HMNW: tables disagree on memory size");
    }
  }
  for (const auto& table : idx.tables) {
    std::vector<std::uint8_t> hit(idx.n_facts, 0);
    for (const auto& kv : table) {
      for (std::uint32_t i : kv.second) {
        if (i >= idx.n_facts || hit[i]) {
          throw ValidationError("HMNW: table does not hold every row exactly once");
        }
        hit[i] = 1;
      }
    }
  }
  return idx;
}

void save_wta_index(const WtaIndex& idx, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_wta_index(idx, out);
  io::write_file(path, out.data());
}

WtaIndex load_wta_index(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNW hash index " + path.string());
  WtaIndex out = decode_wta_index(in);
  in.expect_end();
  return out;
}

WtaRetriever::WtaRetriever(const WtaIndex& idx, std::size_t base_dim,
                           std::size_t budget, bool multi_probe)
    : idx_(&idx), base_dim_(base_dim), budget_(budget), multi_probe_(multi_probe) {
  if (base_dim > idx.aug_dim) throw ArgumentError("base dim exceeds index dim");
  if (budget < 1) throw ArgumentError("budget must be >= 1");
}

CandidateSet WtaRetriever::retrieve(std::span<const double> query,
                                    std::uint64_t) const {
  const QueryVector q_aug = augment_query(query, base_dim_, idx_->aug_dim - base_dim_);
  return retrieve_wta(*idx_, q_aug.values, budget_, multi_probe_);
}

}  // namespace hmn
