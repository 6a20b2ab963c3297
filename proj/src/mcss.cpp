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
#include "hmn/mcss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmn/error.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNA";
constexpr std::uint32_t kVersion = 1;

double squared_norm(std::span<const float> x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * static_cast<double>(v);
  return s;
}

}  // namespace

void McssConfig::validate() const {
  if (!(u > 0.0 && u < 1.0)) {
    throw ArgumentError("MCSS scale ceiling u must lie in (0, 1), got " +
                        std::to_string(u));
  }
  if (aug_terms < 1) throw ArgumentError("aug_terms must be >= 1");
  if (aug_terms > 30) throw ArgumentError("aug_terms must be <= 30");
}

double fit_scale(const MemoryMatrix& m, const McssConfig& cfg) {
  cfg.validate();
  double max_sq = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    max_sq = std::max(max_sq, squared_norm(m.row(i)));
  }
  if (max_sq == 0.0) {
    throw DegenerateInputError("cannot fit MCSS scale: every memory row is zero");
  }
  return cfg.u / std::sqrt(max_sq);
}

std::vector<double> augment_vector(std::span<const double> x_scaled,
                                   std::size_t aug_terms) {
  std::vector<double> out(x_scaled.begin(), x_scaled.end());
  out.reserve(x_scaled.size() + aug_terms);
  double power = 0.0;  // |x|^2, then |x|^4, |x|^8, ...
  for (double v : x_scaled) power += v * v;
  for (std::size_t t = 0; t < aug_terms; ++t) {
    out.push_back(0.5 - power);
    power *= power;
  }
  return out;
}

AugmentedMemory augment_memory(const MemoryMatrix& m, const McssConfig& cfg) {
  const double scale = fit_scale(m, cfg);
  const std::size_t d = m.dim();
  const std::size_t ad = d + cfg.aug_terms;
  std::vector<float> values(m.rows() * ad);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < d; ++j) x[j] = scale * static_cast<double>(row[j]);
    const std::vector<double> p = augment_vector(x, cfg.aug_terms);
    float* dst = values.data() + i * ad;
    for (std::size_t j = 0; j < ad; ++j) dst[j] = static_cast<float>(p[j]);
  }
  return AugmentedMemory{scale, d, cfg.aug_terms,
                         MemoryMatrix(m.rows(), ad, std::move(values))};
}

QueryVector augment_query(std::span<const double> q, std::size_t base_dim,
                          std::size_t aug_terms) {
  if (q.size() != base_dim) {
    throw ArgumentError("augment_query: query dim " + std::to_string(q.size()) +
                        " != base dim " + std::to_string(base_dim));
  }
  std::vector<double> out(q.begin(), q.end());
  out.resize(base_dim + aug_terms, 0.0);
  return QueryVector(std::move(out));
}

void encode_augmented(const AugmentedMemory& am, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(am.base_dim));
  out.u32(static_cast<std::uint32_t>(am.aug_terms));
  out.f64(am.scale_factor);
  encode_memory(am.values, out);
}

AugmentedMemory decode_augmented(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  const std::size_t base_dim = in.u32();
  const std::size_t aug_terms = in.u32();
  const double scale = in.f64();
  MemoryMatrix values = decode_memory(in);
  if (values.dim() != base_dim + aug_terms) {
    throw FormatError("HMNA: augmented dim " + std::to_string(values.dim()) +
                      " != base_dim + aug_terms");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("HMNA: scale factor must be finite and positive");
  }
  return AugmentedMemory{scale, base_dim, aug_terms, std::move(values)};
}

void save_augmented(const AugmentedMemory& am, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_augmented(am, out);
  io::write_file(path, out.data());
}

AugmentedMemory load_augmented(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNA augmented memory " + path.string());
  AugmentedMemory out = decode_augmented(in);
  in.expect_end();
  return out;
}

}  // namespace hmn
