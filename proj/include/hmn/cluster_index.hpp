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
#include <optional>
#include <span>
#include <vector>

#include "hmn/mcss.hpp"
#include "hmn/retriever.hpp"
#include "hmn/rng.hpp"

namespace hmn {

//! Optional upper level: the fine centroids clustered into groups.
struct CoarseLevel {
  std::size_t n_groups = 0;
  std::vector<float> centroids;       // n_groups x aug_dim, unit rows
  std::vector<std::uint32_t> group;   // fine cluster -> group id
};

//! Spherical k-means partition of an augmented memory.
struct ClusterIndex {
  std::size_t n_clusters = 0;
  std::size_t aug_dim = 0;
  std::uint64_t seed = 0;
  std::vector<float> centroids;                    // C x aug_dim, unit rows
  std::vector<std::uint32_t> assignment;           // N entries
  std::vector<std::vector<std::uint32_t>> members; // ascending per cluster
  std::optional<CoarseLevel> coarse;

  std::size_t n_facts() const { return assignment.size(); }
  std::span<const float> centroid(std::size_t c) const {
    return {centroids.data() + c * aug_dim, aug_dim};
  }
};

struct ClusterBuildOptions {
  std::size_t n_clusters = 100;
  std::size_t max_iters = 20;
  std::uint64_t seed = 0;
  //! Groups in the optional second level; 0 builds a flat index.
  std::size_t coarse_groups = 0;
};

//! Per-build trace, used to check the objective is monotone.
struct ClusterBuildTrace {
  std::vector<double> objective;  // sum of cosines after each iteration
  std::size_t iterations = 0;
  bool converged = false;
};

ClusterIndex build_cluster_index(const AugmentedMemory& am,
                                 const ClusterBuildOptions& opts,
                                 ClusterBuildTrace* trace = nullptr);

//! Members of clusters ranked by query.centroid, plus sampled clusters and
//! random contiguous memory blocks.
struct RetrievalStrategy {
  std::size_t top_clusters = 1;
  std::size_t sampled_clusters = 0;
  std::size_t rand_blocks = 0;
  std::size_t block_count = 1;
  std::uint64_t rng_seed = 0;
  //! With a coarse level: rank only fine clusters inside this many top groups.
  //! 0 ignores the coarse level.
  std::size_t coarse_probe = 0;

  //! Throws ArgumentError when the strategy cannot be served by `idx`.
  void validate(const ClusterIndex& idx) const;
};

//! Draws `s` distinct cluster ids without replacement from those not in
//! `exclude`, with P(j) proportional to exp(scores[j]) renormalised after each
//! draw.
std::vector<std::uint32_t> sample_clusters(std::span<const double> scores,
                                           std::span<const std::uint8_t> exclude,
                                           std::size_t s, Rng& rng);

//! `q_aug` is an augmented query. Randomness comes from `rng`.
CandidateSet retrieve_cluster(const ClusterIndex& idx,
                              std::span<const double> q_aug,
                              const RetrievalStrategy& strat, Rng& rng);

//! Number of top clusters whose expected pooled size is closest to `budget`
//! (mean cluster size times t), at least 1.
std::size_t top_clusters_for_budget(const ClusterIndex& idx, std::size_t budget);

void encode_cluster_index(const ClusterIndex& idx, io::ByteWriter& out);
ClusterIndex decode_cluster_index(io::ByteReader& in);
void save_cluster_index(const ClusterIndex& idx, const std::filesystem::path& path);
ClusterIndex load_cluster_index(const std::filesystem::path& path);

class ClusterRetriever final : public Retriever {
 public:
  ClusterRetriever(const ClusterIndex& idx, std::size_t base_dim,
                   RetrievalStrategy strat);
  CandidateSet retrieve(std::span<const double> query,
                        std::uint64_t stream) const override;
  std::string name() const override { return "cluster"; }
  const RetrievalStrategy& strategy() const { return strat_; }

 private:
  const ClusterIndex* idx_;
  std::size_t base_dim_;
  RetrievalStrategy strat_;
};

}  // namespace hmn
