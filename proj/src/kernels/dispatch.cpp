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
#include <atomic>
#include <cstdlib>
#include <string_view>

#include "hmn/error.hpp"
#include "hmn/kernels.hpp"

namespace hmn::kernels {

#if defined(HMN_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(HMN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

bool force_scalar_from_env() {
  const char* v = std::getenv("HMN_FORCE_SCALAR");
  if (v == nullptr) return false;
  const std::string_view s(v);
  return !s.empty() && s != "0";
}

const KernelTable* initial_table() {
  if (!force_scalar_from_env()) {
    if (const KernelTable* t = avx2_table()) return t;
  }
  return &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(HMN_HAVE_AVX2)
  if (cpu_has_avx2()) return &avx2_kernels();
#endif
  return nullptr;
}

bool avx2_available() { return avx2_table() != nullptr; }

const KernelTable& active() {
  return *active_slot().load(std::memory_order_acquire);
}

void set_active(Isa isa) {
  if (isa == Isa::kScalar) {
    active_slot().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw ArgumentError("AVX2 kernels are not available");
  active_slot().store(t, std::memory_order_release);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace hmn::kernels
