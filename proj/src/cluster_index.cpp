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
#include "hmn/cluster_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"
#include "hmn/kernels.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNC";
constexpr char kCoarseMagic[] = "HMNH";
constexpr std::uint32_t kVersion = 1;

struct KMeansResult {
  std::vector<float> centroids;
  std::vector<std::uint32_t> assignment;
};

// Rows of `points` are unit vectors (or zero). Centroid c is stored both as
// float (scored by the kernels) and recomputed from members each iteration.
class SphericalKMeans {
 public:
  SphericalKMeans(std::span<const double> points, std::size_t n, std::size_t dim)
      : points_(points), n_(n), dim_(dim) {}

  KMeansResult run(std::size_t k, std::size_t max_iters, std::uint64_t seed,
                   ClusterBuildTrace* trace) {
    k_ = k;
    centroids_.assign(k * dim_, 0.0f);
    assignment_.assign(n_, 0);
    seed_plus_plus(seed);

    std::vector<std::uint32_t> previous;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      assign();
      const bool reseeded = reseed_empty();
      if (!reseeded && assignment_ == previous) {
        if (trace) trace->converged = true;
        break;
      }
      previous = assignment_;
      update();
      if (trace) {
        trace->objective.push_back(objective());
        trace->iterations = iter + 1;
      }
    }
    return KMeansResult{std::move(centroids_), std::move(assignment_)};
  }

 private:
  std::span<const double> point(std::size_t i) const {
    return points_.subspan(i * dim_, dim_);
  }

  void set_centroid(std::size_t c, std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
    float* dst = centroids_.data() + c * dim_;
    for (std::size_t j = 0; j < dim_; ++j) dst[j] = static_cast<float>(v[j] * inv);
  }

  double cosine_to(std::size_t i, std::size_t c) const {
    const auto p = point(i);
    const float* x = centroids_.data() + c * dim_;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) acc += p[j] * static_cast<double>(x[j]);
    return acc;
  }

  // k-means++ on cosine distance 1 - cos.
  void seed_plus_plus(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x6b6d65616e73ULL));
    std::vector<std::uint8_t> chosen(n_, 0);
    std::vector<double> best_cos(n_, -std::numeric_limits<double>::infinity());
    std::vector<double> scores(1);
    std::size_t pick = rng.below(n_);
    for (std::size_t c = 0; c < k_; ++c) {
      chosen[pick] = 1;
      set_centroid(c, point(pick));
      if (c + 1 == k_) break;
      double total = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        best_cos[i] = std::max(best_cos[i], cosine_to(i, c));
        if (!chosen[i]) total += std::max(0.0, 1.0 - best_cos[i]);
      }
      std::size_t next = n_;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < n_; ++i) {
          if (chosen[i]) continue;
          const double w = std::max(0.0, 1.0 - best_cos[i]);
          if (w <= 0.0) continue;
          next = i;
          if (u < w) break;
          u -= w;
        }
      }
      if (next == n_) {
        // All remaining points coincide with a chosen one.
        for (std::size_t i = 0; i < n_; ++i) {
          if (!chosen[i]) {
            next = i;
            break;
          }
        }
      }
      pick = next;
    }
  }

  void assign() {
    std::vector<double> scores(k_);
    best_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      kernels::score_range(point(i), centroids_.data(), 0, scores);
      std::uint32_t arg = 0;
      for (std::uint32_t c = 1; c < k_; ++c) {
        if (scores[c] > scores[arg]) arg = c;
      }
      assignment_[i] = arg;
      best_[i] = scores[arg];
    }
  }

  // Each empty cluster takes the point farthest from its centroid, drawn from
  // clusters that can spare one. Returns whether anything moved.
  bool reseed_empty() {
    std::vector<std::size_t> counts(k_, 0);
    for (std::uint32_t a : assignment_) ++counts[a];
    bool moved = false;
    std::vector<std::uint8_t> taken(n_, 0);
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n_;
      for (std::size_t i = 0; i < n_; ++i) {
        if (taken[i] || counts[assignment_[i]] < 2) continue;
        if (far == n_ || best_[i] < best_[far]) far = i;
      }
      if (far == n_) throw ArgumentError("cannot reseed empty cluster");
      --counts[assignment_[far]];
      assignment_[far] = static_cast<std::uint32_t>(c);
      ++counts[c];
      taken[far] = 1;
      best_[far] = 1.0;
      set_centroid(c, point(far));
      moved = true;
    }
    return moved;
  }

  void update() {
    std::vector<double> sums(k_ * dim_, 0.0);
    std::vector<std::size_t> first(k_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t c = assignment_[i];
      if (first[c] == n_) first[c] = i;
      const auto p = point(i);
      double* s = sums.data() + c * dim_;
      for (std::size_t j = 0; j < dim_; ++j) s[j] += p[j];
    }
    for (std::size_t c = 0; c < k_; ++c) {
      std::span<const double> s(sums.data() + c * dim_, dim_);
      double sq = 0.0;
      for (double x : s) sq += x * x;
      if (sq > 0.0) {
        set_centroid(c, s);
      } else if (first[c] != n_) {
        set_centroid(c, point(first[c]));
      }
    }
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) total += cosine_to(i, assignment_[i]);
    return total;
  }

  std::span<const double> points_;
  std::size_t n_;
  std::size_t dim_;
  std::size_t k_ = 0;
  std::vector<float> centroids_;
  std::vector<std::uint32_t> assignment_;
  std::vector<double> best_;
};

std::vector<double> normalized_rows(std::span<const float> values, std::size_t n,
                                    std::size_t dim) {
  std::vector<double> out(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = values[i * dim + j];
      sq += v * v;
    }
    const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      out[i * dim + j] = static_cast<double>(values[i * dim + j]) * inv;
    }
  }
  return out;
}

void rebuild_members(ClusterIndex& idx) {
  idx.members.assign(idx.n_clusters, {});
  for (std::uint32_t i = 0; i < idx.assignment.size(); ++i) {
    idx.members[idx.assignment[i]].push_back(i);
  }
}

void append_unique(std::span<const std::uint32_t> ids,
                   std::vector<std::uint8_t>& seen, CandidateSet& out) {
  for (std::uint32_t i : ids) {
    if (!seen[i]) {
      seen[i] = 1;
      out.indices.push_back(i);
    }
  }
}

}  // namespace

ClusterIndex build_cluster_index(const AugmentedMemory& am,
                                 const ClusterBuildOptions& opts,
                                 ClusterBuildTrace* trace) {
  const std::size_t n = am.rows();
  const std::size_t dim = am.aug_dim();
  if (opts.n_clusters < 1 || opts.n_clusters > n) {
    throw ArgumentError("n_clusters must lie in [1, N], got " +
                        std::to_string(opts.n_clusters));
  }
  if (opts.max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (opts.coarse_groups > opts.n_clusters) {
    throw ArgumentError("coarse_groups must not exceed n_clusters");
  }

  const std::vector<double> points = normalized_rows(am.values.values(), n, dim);
  SphericalKMeans kmeans(points, n, dim);
  KMeansResult fine = kmeans.run(opts.n_clusters, opts.max_iters, opts.seed, trace);

  ClusterIndex idx;
  idx.n_clusters = opts.n_clusters;
  idx.aug_dim = dim;
  idx.seed = opts.seed;
  idx.centroids = std::move(fine.centroids);
  idx.assignment = std::move(fine.assignment);
  rebuild_members(idx);

  if (opts.coarse_groups > 0) {
    const std::vector<double> cpoints =
        normalized_rows(idx.centroids, idx.n_clusters, dim);
    SphericalKMeans upper(cpoints, idx.n_clusters, dim);
    KMeansResult top = upper.run(opts.coarse_groups, opts.max_iters,
                                 mix_seed(opts.seed, 2), nullptr);
    idx.coarse = CoarseLevel{opts.coarse_groups, std::move(top.centroids),
                             std::move(top.assignment)};
  }
  return idx;
}

void RetrievalStrategy::validate(const ClusterIndex& idx) const {
  const std::size_t c = idx.n_clusters;
  if (top_clusters + sampled_clusters == 0 && rand_blocks == 0) {
    throw ArgumentError("strategy selects nothing: need t + s >= 1 or b >= 1");
  }
  if (top_clusters > c) throw ArgumentError("top_clusters exceeds cluster count");
  if (sampled_clusters > c - top_clusters) {
    throw ArgumentError("sampled_clusters exceeds clusters left after top-t");
  }
  if (block_count < 1) throw ArgumentError("block_count must be >= 1");
  if (rand_blocks > block_count) throw ArgumentError("rand_blocks exceeds block_count");
  if (rand_blocks > 0 && block_count > idx.n_facts()) {
    throw ArgumentError("block_count exceeds memory size");
  }
  if (coarse_probe > 0 && !idx.coarse) {
    throw ArgumentError("coarse_probe set but index has no coarse level");
  }
}

std::vector<std::uint32_t> sample_clusters(std::span<const double> scores,
                                           std::span<const std::uint8_t> exclude,
                                           std::size_t s, Rng& rng) {
  std::vector<std::uint32_t> remaining;
  remaining.reserve(scores.size());
  for (std::uint32_t j = 0; j < scores.size(); ++j) {
    if (exclude.empty() || !exclude[j]) remaining.push_back(j);
  }
  if (s > remaining.size()) {
    throw ArgumentError("cannot sample " + std::to_string(s) + " clusters from " +
                        std::to_string(remaining.size()) + " remaining");
  }
  std::vector<std::uint32_t> picked;
  picked.reserve(s);
  std::vector<double> weights;
  for (std::size_t draw = 0; draw < s; ++draw) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::uint32_t j : remaining) top = std::max(top, scores[j]);
    weights.resize(remaining.size());
    double total = 0.0;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      weights[r] = std::exp(scores[remaining[r]] - top);
      total += weights[r];
    }
    double u = rng.uniform() * total;
    std::size_t chosen = remaining.size() - 1;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      if (u < weights[r]) {
        chosen = r;
        break;
      }
      u -= weights[r];
    }
    picked.push_back(remaining[chosen]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return picked;
}

CandidateSet retrieve_cluster(const ClusterIndex& idx,
                              std::span<const double> q_aug,
                              const RetrievalStrategy& strat, Rng& rng) {
  if (q_aug.size() != idx.aug_dim) {
    throw ArgumentError("query dim " + std::to_string(q_aug.size()) +
                        " does not match index dim " + std::to_string(idx.aug_dim));
  }
  strat.validate(idx);

  const std::size_t c = idx.n_clusters;
  std::vector<double> scores(c);
  kernels::score_range(q_aug, idx.centroids.data(), 0, scores);

  std::vector<std::uint32_t> eligible;
  if (strat.coarse_probe > 0) {
    const CoarseLevel& lvl = *idx.coarse;
    std::vector<double> gscores(lvl.n_groups);
    kernels::score_range(q_aug, lvl.centroids.data(), 0, gscores);
    std::vector<std::uint32_t> gids(lvl.n_groups);
    std::iota(gids.begin(), gids.end(), 0u);
    const CandidateSet groups = select_top_k(gids, gscores, strat.coarse_probe);
    std::vector<std::uint8_t> open(lvl.n_groups, 0);
    for (std::uint32_t g : groups.indices) open[g] = 1;
    for (std::uint32_t j = 0; j < c; ++j) {
      if (open[lvl.group[j]]) eligible.push_back(j);
    }
  } else {
    eligible.resize(c);
    std::iota(eligible.begin(), eligible.end(), 0u);
  }
  std::vector<double> eligible_scores(eligible.size());
  for (std::size_t e = 0; e < eligible.size(); ++e) {
    eligible_scores[e] = scores[eligible[e]];
  }
  const CandidateSet top =
      select_top_k(eligible, eligible_scores, strat.top_clusters);

  CandidateSet out;
  std::vector<std::uint8_t> seen(idx.n_facts(), 0);
  std::vector<std::uint8_t> excluded(c, 0);
  for (std::uint32_t cl : top.indices) {
    excluded[cl] = 1;
    append_unique(idx.members[cl], seen, out);
  }
  if (strat.sampled_clusters > 0) {
    for (std::uint32_t cl : sample_clusters(scores, excluded, strat.sampled_clusters, rng)) {
      append_unique(idx.members[cl], seen, out);
    }
  }
  if (strat.rand_blocks > 0) {
    const std::size_t n = idx.n_facts();
    std::vector<std::uint32_t> blocks(strat.block_count);
    std::iota(blocks.begin(), blocks.end(), 0u);
    for (std::size_t b = 0; b < strat.rand_blocks; ++b) {
      const std::size_t j = b + rng.below(blocks.size() - b);
      std::swap(blocks[b], blocks[j]);
      const std::size_t lo = blocks[b] * n / strat.block_count;
      const std::size_t hi = (blocks[b] + 1) * n / strat.block_count;
      for (std::size_t i = lo; i < hi; ++i) {
        if (!seen[i]) {
          seen[i] = 1;
          out.indices.push_back(static_cast<std::uint32_t>(i));
        }
      }
    }
  }
  return out;
}

std::size_t top_clusters_for_budget(const ClusterIndex& idx, std::size_t budget) {
  const double mean_size =
      static_cast<double>(idx.n_facts()) / static_cast<double>(idx.n_clusters);
  const auto t = static_cast<std::size_t>(
      std::llround(static_cast<double>(budget) / mean_size));
  return std::clamp<std::size_t>(t, 1, idx.n_clusters);
}

void encode_cluster_index(const ClusterIndex& idx, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(idx.n_clusters));
  out.u32(static_cast<std::uint32_t>(idx.aug_dim));
  out.u64(idx.seed);
  out.f32s(idx.centroids);
  out.u32s(idx.assignment);
  if (idx.coarse) {
    // Optional trailer, recognisable from the end of the file.
    out.f32s(idx.coarse->centroids);
    out.u32s(idx.coarse->group);
    out.u32(static_cast<std::uint32_t>(idx.coarse->n_groups));
    out.magic(kCoarseMagic);
  }
}

ClusterIndex decode_cluster_index(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  ClusterIndex idx;
  idx.n_clusters = in.u32();
  idx.aug_dim = in.u32();
  idx.seed = in.u64();
  if (idx.n_clusters == 0 || idx.aug_dim == 0) {
    throw FormatError("HMNC: cluster count and dim must be positive");
  }
  idx.centroids.resize(idx.n_clusters * idx.aug_dim);
  in.f32s(idx.centroids);

  std::size_t assignment_bytes = in.remaining();
  const auto rest = in.rest();
  std::size_t groups = 0;
  const bool has_coarse =
      rest.size() >= 8 &&
      std::equal(rest.end() - 4, rest.end(), kCoarseMagic,
                 [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); });
  if (has_coarse) {
    io::ByteReader tail(rest.subspan(rest.size() - 8, 4), "HMNC trailer");
    groups = tail.u32();
    const std::size_t trailer =
        groups * idx.aug_dim * 4 + idx.n_clusters * 4 + 8;
    if (trailer > rest.size()) throw LengthError("HMNC: truncated coarse level");
    assignment_bytes = rest.size() - trailer;
  }
  if (assignment_bytes % 4 != 0 || assignment_bytes == 0) {
    throw LengthError("HMNC: assignment block has invalid length");
  }
  idx.assignment.resize(assignment_bytes / 4);
  in.u32s(idx.assignment);
  for (std::uint32_t a : idx.assignment) {
    if (a >= idx.n_clusters) throw ValidationError("HMNC: assignment out of range");
  }
  rebuild_members(idx);
  for (const auto& m : idx.members) {
    if (m.empty()) throw ValidationError("HMNC: index contains an empty cluster");
  }
  if (has_coarse) {
    CoarseLevel lvl;
    lvl.n_groups = groups;
    lvl.centroids.resize(groups * idx.aug_dim);
    in.f32s(lvl.centroids);
    lvl.group.resize(idx.n_clusters);
    in.u32s(lvl.group);
    for (std::uint32_t g : lvl.group) {
      if (g >= groups) throw ValidationError("HMNC: group id out of range");
    }
    in.skip(8);
    idx.coarse = std::move(lvl);
  }
  return idx;
}

void save_cluster_index(const ClusterIndex& idx, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_cluster_index(idx, out);
  io::write_file(path, out.data());
}

ClusterIndex load_cluster_index(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNC cluster index " + path.string());
  ClusterIndex out = decode_cluster_index(in);
  in.expect_end();
  return out;
}

ClusterRetriever::ClusterRetriever(const ClusterIndex& idx, std::size_t base_dim,
                                   RetrievalStrategy strat)
    : idx_(&idx), base_dim_(base_dim), strat_(strat) {
  if (base_dim > idx.aug_dim) {
    throw ArgumentError("base dim exceeds index dim");
  }
  strat_.validate(idx);
}

CandidateSet ClusterRetriever::retrieve(std::span<const double> query,
                                        std::uint64_t stream) const {
  const QueryVector q_aug =
      augment_query(query, base_dim_, idx_->aug_dim - base_dim_);
  Rng rng(mix_seed(strat_.rng_seed, stream));
  return retrieve_cluster(*idx_, q_aug.values, strat_, rng);
}

}  // namespace hmn
