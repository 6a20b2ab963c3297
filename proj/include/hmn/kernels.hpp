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
#include <span>

// Inner-product kernels shared by every retrieval path.
//
// Each kernel has a scalar reference and an AVX2 variant. The AVX2 variants
// keep the exact operation order of the scalar code (lanes run over rows or
// over independent elements, never over the reduction axis), so both paths
// produce bit-identical results. Products are formed in double precision and
// accumulated left to right.

namespace hmn::kernels {

enum class Isa { kScalar, kAvx2 };

//! out[i] = sum_j query[j] * base[rows[i] * dim + j]
using ScoreRowsFn = void (*)(const double* query, const float* base,
                             std::size_t dim, const std::uint32_t* rows,
                             std::size_t n_rows, double* out);

//! out[i] = sum_j query[j] * base[(first + i) * dim + j]
using ScoreRangeFn = void (*)(const double* query, const float* base,
                              std::size_t dim, std::size_t first,
                              std::size_t n_rows, double* out);

//! y[j] += alpha * x[j]
using AxpyFn = void (*)(double alpha, const float* x, double* y,
                        std::size_t n);

struct KernelTable {
  Isa isa;
  ScoreRowsFn score_rows;
  ScoreRangeFn score_range;
  AxpyFn axpy;
};

const KernelTable& scalar_table();

//! Nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

//! True when the running CPU supports AVX2 and the variant was compiled in.
bool avx2_available();

//! Selected once at startup: AVX2 when available unless the environment
//! variable HMN_FORCE_SCALAR is set to a non-empty value other than "0".
const KernelTable& active();

//! Overrides the runtime selection (tests and benchmarks).
void set_active(Isa isa);

const char* isa_name(Isa isa);

inline void score_rows(std::span<const double> query, const float* base,
                       std::span<const std::uint32_t> rows,
                       std::span<double> out) {
  active().score_rows(query.data(), base, query.size(), rows.data(),
                      rows.size(), out.data());
}

inline void score_range(std::span<const double> query, const float* base,
                        std::size_t first, std::span<double> out) {
  active().score_range(query.data(), base, query.size(), first, out.size(),
                       out.data());
}

inline void axpy(double alpha, std::span<const float> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace hmn::kernels
