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
#include "hmn/memory.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hmn/error.hpp"
#include "hmn/kernels.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNM";
constexpr std::uint32_t kVersion = 1;

void check_dim(std::span<const double> q, const MemoryMatrix& m) {
  if (q.size() != m.dim()) {
    throw ArgumentError("query dim " + std::to_string(q.size()) +
                        " does not match memory dim " + std::to_string(m.dim()));
  }
}

}  // namespace

MemoryMatrix::MemoryMatrix(std::size_t n_facts, std::size_t dim,
                           std::vector<float> values)
    : n_facts_(n_facts), dim_(dim), values_(std::move(values)) {
  if (n_facts_ == 0 || dim_ == 0) {
    throw ValidationError("memory must have at least one row and one column");
  }
  if (n_facts_ > std::numeric_limits<std::uint32_t>::max() ||
      dim_ > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("memory shape exceeds 32-bit limits");
  }
  if (values_.size() != n_facts_ * dim_) {
    throw ValidationError("memory payload has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(n_facts_ * dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("non-finite memory entry at row " +
                            std::to_string(i / dim_) + ", column " +
                            std::to_string(i % dim_));
    }
  }
}

void encode_memory(const MemoryMatrix& m, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(m.rows()));
  out.u32(static_cast<std::uint32_t>(m.dim()));
  out.f32s(m.values());
}

MemoryMatrix decode_memory(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  const std::size_t n = in.u32();
  const std::size_t d = in.u32();
  in.require(n * d * 4);
  std::vector<float> values(n * d);
  in.f32s(values);
  return MemoryMatrix(n, d, std::move(values));
}

MemoryMatrix load_memory(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNM memory " + path.string());
  MemoryMatrix out = decode_memory(in);
  in.expect_end();
  return out;
}

void save_memory(const MemoryMatrix& m, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_memory(m, out);
  io::write_file(path, out.data());
}

std::vector<double> score_subset(std::span<const double> q,
                                 const MemoryMatrix& m,
                                 std::span<const std::uint32_t> idx) {
  check_dim(q, m);
  for (std::uint32_t i : idx) {
    if (i >= m.rows()) {
      throw BoundsError("memory index " + std::to_string(i) +
                        " out of range for N=" + std::to_string(m.rows()));
    }
  }
  std::vector<double> out(idx.size());
  kernels::score_rows(q, m.data(), idx, out);
  return out;
}

std::vector<double> score_all(std::span<const double> q, const MemoryMatrix& m) {
  check_dim(q, m);
  std::vector<double> out(m.rows());
  kernels::score_range(q, m.data(), 0, out);
  return out;
}

}  // namespace hmn
