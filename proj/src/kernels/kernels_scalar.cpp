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
#include "hmn/kernels.hpp"

namespace hmn::kernels {
namespace {

void score_rows_scalar(const double* query, const float* base, std::size_t dim,
                       const std::uint32_t* rows, std::size_t n_rows,
                       double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) {
    const float* x = base + static_cast<std::size_t>(rows[i]) * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      acc += query[j] * static_cast<double>(x[j]);
    }
    out[i] = acc;
  }
}

void score_range_scalar(const double* query, const float* base,
                        std::size_t dim, std::size_t first, std::size_t n_rows,
                        double* out) {
  const float* x = base + first * dim;
  for (std::size_t i = 0; i < n_rows; ++i, x += dim) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      acc += query[j] * static_cast<double>(x[j]);
    }
    out[i] = acc;
  }
}

void axpy_scalar(double alpha, const float* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    y[j] += alpha * static_cast<double>(x[j]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, &score_rows_scalar,
                                 &score_range_scalar, &axpy_scalar};
  return table;
}

}  // namespace hmn::kernels
