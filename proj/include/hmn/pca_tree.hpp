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

#include "hmn/mcss.hpp"
#include "hmn/retriever.hpp"

namespace hmn {

struct PcaTreeNode {
  bool is_leaf = false;
  // Internal nodes.
  std::vector<float> direction;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  // Leaves, ascending.
  std::vector<std::uint32_t> members;
};

//! Balanced binary space partition on per-node principal directions. Nodes
//! are stored in preorder; node 0 is the root.
struct PcaTreeIndex {
  std::size_t leaf_size = 0;
  std::size_t aug_dim = 0;
  std::uint64_t seed = 0;
  std::vector<PcaTreeNode> nodes;
};

//! Splits until every leaf holds at most `leaf_size` rows. The tree has
//! L = ceil(N / leaf_size) leaves; a node owning l leaves sends floor(l/2) of
//! them left by cutting its projection-sorted points at rank
//! ceil(n * floor(l/2) / l). When l is a power of two this is the median cut.
PcaTreeIndex build_pca_tree(const AugmentedMemory& am, std::size_t leaf_size,
                            std::uint64_t seed);

//! Id of the leaf reached by single-path descent.
std::uint32_t pca_tree_leaf(const PcaTreeIndex& idx, std::span<const double> q_aug);

//! Members of the leaf reached by single-path descent.
CandidateSet retrieve_pca_tree(const PcaTreeIndex& idx,
                               std::span<const double> q_aug);

void encode_pca_tree(const PcaTreeIndex& idx, io::ByteWriter& out);
PcaTreeIndex decode_pca_tree(io::ByteReader& in);
void save_pca_tree(const PcaTreeIndex& idx, const std::filesystem::path& path);
PcaTreeIndex load_pca_tree(const std::filesystem::path& path);

class PcaTreeRetriever final : public Retriever {
 public:
  PcaTreeRetriever(const PcaTreeIndex& idx, std::size_t base_dim);
  CandidateSet retrieve(std::span<const double> query,
                        std::uint64_t stream) const override;
  std::string name() const override { return "pca-tree"; }

 private:
  const PcaTreeIndex* idx_;
  std::size_t base_dim_;
};

}  // namespace hmn
