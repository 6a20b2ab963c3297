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
#include "hmn/pca_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmn/error.hpp"
#include "hmn/rng.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNT";
constexpr std::uint32_t kVersion = 1;
constexpr int kPowerIters = 50;
constexpr double kPowerTol = 1e-7;

double project(std::span<const float> x, std::span<const float> dir) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    acc += static_cast<double>(x[j]) * static_cast<double>(dir[j]);
  }
  return acc;
}

class TreeBuilder {
 public:
  TreeBuilder(const MemoryMatrix& data, std::uint64_t seed, PcaTreeIndex& out)
      : data_(data), seed_(seed), out_(out) {}

  std::uint32_t build(std::vector<std::uint32_t> ids, std::size_t n_leaves) {
    const auto node_id = static_cast<std::uint32_t>(out_.nodes.size());
    out_.nodes.emplace_back();
    if (n_leaves <= 1) {
      std::sort(ids.begin(), ids.end());
      out_.nodes[node_id].is_leaf = true;
      out_.nodes[node_id].members = std::move(ids);
      return node_id;
    }

    std::vector<float> dir = principal_direction(ids, node_id);
    std::vector<std::pair<double, std::uint32_t>> proj;
    proj.reserve(ids.size());
    for (std::uint32_t i : ids) proj.emplace_back(project(data_.row(i), dir), i);
    std::sort(proj.begin(), proj.end());

    const std::size_t n = ids.size();
    const std::size_t left_leaves = n_leaves / 2;
    const std::size_t left_count = (n * left_leaves + n_leaves - 1) / n_leaves;
    std::vector<std::uint32_t> left_ids;
    std::vector<std::uint32_t> right_ids;
    left_ids.reserve(left_count);
    right_ids.reserve(n - left_count);
    for (std::size_t r = 0; r < n; ++r) {
      (r < left_count ? left_ids : right_ids).push_back(proj[r].second);
    }
    const double threshold = proj[left_count - 1].first;
    ids.clear();
    ids.shrink_to_fit();

    const std::uint32_t l = build(std::move(left_ids), left_leaves);
    const std::uint32_t r = build(std::move(right_ids), n_leaves - left_leaves);
    PcaTreeNode& node = out_.nodes[node_id];
    node.direction = std::move(dir);
    node.threshold = threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }

 private:
  // Power iteration on the centred scatter matrix, never formed explicitly.
  std::vector<float> principal_direction(const std::vector<std::uint32_t>& ids,
                                         std::uint32_t node_id) {
    const std::size_t dim = data_.dim();
    std::vector<double> mean(dim, 0.0);
    for (std::uint32_t i : ids) {
      const auto x = data_.row(i);
      for (std::size_t j = 0; j < dim; ++j) mean[j] += x[j];
    }
    for (double& m : mean) m /= static_cast<double>(ids.size());

    Rng rng(mix_seed(seed_, node_id));
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    normalize(v);

    std::vector<double> w(dim);
    std::vector<double> centred(dim);
    for (int it = 0; it < kPowerIters; ++it) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::uint32_t i : ids) {
        const auto x = data_.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          centred[j] = static_cast<double>(x[j]) - mean[j];
          dot += centred[j] * v[j];
        }
        for (std::size_t j = 0; j < dim; ++j) w[j] += dot * centred[j];
      }
      if (!normalize(w)) break;  // zero scatter: keep the seeded direction
      double diff = 0.0;
      for (std::size_t j = 0; j < dim; ++j) diff += (w[j] - v[j]) * (w[j] - v[j]);
      v.swap(w);
      if (std::sqrt(diff) < kPowerTol) break;
    }

    for (double x : v) {
      if (x != 0.0) {
        if (x < 0.0) {
          for (double& y : v) y = -y;
        }
        break;
      }
    }
    return std::vector<float>(v.begin(), v.end());
  }

  static bool normalize(std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (!(sq > 0.0)) return false;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return true;
  }

  const MemoryMatrix& data_;
  std::uint64_t seed_;
  PcaTreeIndex& out_;
};

double project_query(std::span<const double> q, std::span<const float> dir) {
  double acc = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) acc += q[j] * static_cast<double>(dir[j]);
  return acc;
}

}  // namespace

PcaTreeIndex build_pca_tree(const AugmentedMemory& am, std::size_t leaf_size,
                            std::uint64_t seed) {
  if (leaf_size < 1) throw ArgumentError("leaf_size must be >= 1");
  PcaTreeIndex idx;
  idx.leaf_size = leaf_size;
  idx.aug_dim = am.aug_dim();
  idx.seed = seed;
  const std::size_t n = am.rows();
  const std::size_t n_leaves = (n + leaf_size - 1) / leaf_size;
  std::vector<std::uint32_t> ids(n);
  for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
  TreeBuilder(am.values, seed, idx).build(std::move(ids), n_leaves);
  return idx;
}

std::uint32_t pca_tree_leaf(const PcaTreeIndex& idx, std::span<const double> q_aug) {
  if (q_aug.size() != idx.aug_dim) {
    throw ArgumentError("query dim " + std::to_string(q_aug.size()) +
                        " does not match tree dim " + std::to_string(idx.aug_dim));
  }
  std::uint32_t node = 0;
  while (!idx.nodes[node].is_leaf) {
    const PcaTreeNode& n = idx.nodes[node];
    node = project_query(q_aug, n.direction) <= n.threshold ? n.left : n.right;
  }
  return node;
}

CandidateSet retrieve_pca_tree(const PcaTreeIndex& idx,
                               std::span<const double> q_aug) {
  CandidateSet out;
  out.indices = idx.nodes[pca_tree_leaf(idx, q_aug)].members;
  return out;
}

void encode_pca_tree(const PcaTreeIndex& idx, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(idx.leaf_size));
  out.u64(idx.seed);
  out.u32(static_cast<std::uint32_t>(idx.nodes.size()));
  out.u32(static_cast<std::uint32_t>(idx.aug_dim));
  for (const PcaTreeNode& n : idx.nodes) {
    if (n.is_leaf) {
      out.u8(1);
      out.u32(static_cast<std::uint32_t>(n.members.size()));
      out.u32s(n.members);
    } else {
      out.u8(0);
      out.f32s(n.direction);
      out.f64(n.threshold);
      out.u32(n.left);
      out.u32(n.right);
    }
  }
}

PcaTreeIndex decode_pca_tree(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  PcaTreeIndex idx;
  idx.leaf_size = in.u32();
  idx.seed = in.u64();
  const std::uint32_t n_nodes = in.u32();
  idx.aug_dim = in.u32();
  if (n_nodes == 0 || idx.aug_dim == 0) throw FormatError("HMNT: empty tree");
  idx.nodes.resize(n_nodes);
  std::size_t n_points = 0;
  for (std::uint32_t k = 0; k < n_nodes; ++k) {
    PcaTreeNode& n = idx.nodes[k];
    const std::uint8_t tag = in.u8();
    if (tag == 1) {
      n.is_leaf = true;
      n.members.resize(in.u32());
      in.u32s(n.members);
      n_points += n.members.size();
    } else if (tag == 0) {
      n.direction.resize(idx.aug_dim);
      in.f32s(n.direction);
      n.threshold = in.f64();
      n.left = in.u32();
      n.right = in.u32();
      // Preorder: children come after their parent.
      if (n.left <= k || n.right <= k || n.left >= n_nodes || n.right >= n_nodes) {
        throw ValidationError("HMNT: child id out of preorder range");
      }
    } else {
      throw FormatError("HMNT: unknown node tag " + std::to_string(tag));
    }
  }
  std::vector<std::uint8_t> hit(n_points, 0);
  for (const PcaTreeNode& n : idx.nodes) {
    for (std::uint32_t i : n.members) {
      if (i >= n_points || hit[i]) {
        throw ValidationError("HMNT: leaves do not partition the memory");
      }
      hit[i] = 1;
    }
  }
  return idx;
}

void save_pca_tree(const PcaTreeIndex& idx, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_pca_tree(idx, out);
  io::write_file(path, out.data());
}

PcaTreeIndex load_pca_tree(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNT tree index " + path.string());
  PcaTreeIndex out = decode_pca_tree(in);
  in.expect_end();
  return out;
}

PcaTreeRetriever::PcaTreeRetriever(const PcaTreeIndex& idx, std::size_t base_dim)
    : idx_(&idx), base_dim_(base_dim) {
  if (base_dim > idx.aug_dim) throw ArgumentError("base dim exceeds index dim");
}

CandidateSet PcaTreeRetriever::retrieve(std::span<const double> query,
                                        std::uint64_t) const {
  const QueryVector q_aug = augment_query(query, base_dim_, idx_->aug_dim - base_dim_);
  return retrieve_pca_tree(*idx_, q_aug.values);
}

}  // namespace hmn
