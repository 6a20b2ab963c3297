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
// Compiled with -mavx2. Nothing in this translation unit may run before the
// dispatcher has checked the CPU.
#include <immintrin.h>

#include <cstdint>
#include <limits>

#include "hmn/kernels.hpp"

namespace hmn::kernels {
namespace {

constexpr std::size_t kLanes = 8;

// Eight rows per step, one double lane per row. Every lane walks the
// reduction axis left to right exactly like the scalar loop.
inline void score_block8(const double* query, const float* base,
                         std::size_t dim, __m256i offsets, double* out) {
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  for (std::size_t j = 0; j < dim; ++j) {
    const __m256 x = _mm256_i32gather_ps(base + j, offsets, 4);
    const __m256d q = _mm256_set1_pd(query[j]);
    const __m256d x_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(x));
    const __m256d x_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(x, 1));
    acc_lo = _mm256_add_pd(acc_lo, _mm256_mul_pd(q, x_lo));
    acc_hi = _mm256_add_pd(acc_hi, _mm256_mul_pd(q, x_hi));
  }
  _mm256_storeu_pd(out, acc_lo);
  _mm256_storeu_pd(out + 4, acc_hi);
}

inline double score_one(const double* query, const float* x, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    acc += query[j] * static_cast<double>(x[j]);
  }
  return acc;
}

void score_rows_avx2(const double* query, const float* base, std::size_t dim,
                     const std::uint32_t* rows, std::size_t n_rows,
                     double* out) {
  constexpr auto kMaxOffset =
      static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max());
  std::size_t i = 0;
  for (; i + kLanes <= n_rows; i += kLanes) {
    alignas(32) std::int32_t off[kLanes];
    bool fits = true;
    for (std::size_t l = 0; l < kLanes; ++l) {
      const std::size_t o = static_cast<std::size_t>(rows[i + l]) * dim;
      fits = fits && (o + dim <= kMaxOffset);
      off[l] = static_cast<std::int32_t>(o);
    }
    if (!fits) {
      for (std::size_t l = 0; l < kLanes; ++l) {
        out[i + l] = score_one(
            query, base + static_cast<std::size_t>(rows[i + l]) * dim, dim);
      }
      continue;
    }
    const __m256i offsets =
        _mm256_load_si256(reinterpret_cast<const __m256i*>(off));
    score_block8(query, base, dim, offsets, out + i);
  }
  for (; i < n_rows; ++i) {
    out[i] =
        score_one(query, base + static_cast<std::size_t>(rows[i]) * dim, dim);
  }
}

void score_range_avx2(const double* query, const float* base, std::size_t dim,
                      std::size_t first, std::size_t n_rows, double* out) {
  const float* block = base + first * dim;
  std::size_t i = 0;
  if (dim * kLanes < static_cast<std::size_t>(
                         std::numeric_limits<std::int32_t>::max())) {
    const auto d = static_cast<std::int32_t>(dim);
    const __m256i offsets =
        _mm256_setr_epi32(0, d, 2 * d, 3 * d, 4 * d, 5 * d, 6 * d, 7 * d);
    for (; i + kLanes <= n_rows; i += kLanes, block += kLanes * dim) {
      score_block8(query, block, dim, offsets, out + i);
    }
  }
  for (; i < n_rows; ++i, block += dim) {
    out[i] = score_one(query, block, dim);
  }
}

void axpy_avx2(double alpha, const float* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d xv = _mm256_cvtps_pd(_mm_loadu_ps(x + j));
    const __m256d yv = _mm256_loadu_pd(y + j);
    _mm256_storeu_pd(y + j, _mm256_add_pd(yv, _mm256_mul_pd(a, xv)));
  }
  for (; j < n; ++j) {
    y[j] += alpha * static_cast<double>(x[j]);
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::kAvx2, &score_rows_avx2,
                                 &score_range_avx2, &axpy_avx2};
  return table;
}

}  // namespace hmn::kernels
