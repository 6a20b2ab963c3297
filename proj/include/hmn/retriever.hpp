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

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "hmn/memory.hpp"

namespace hmn {

//! A K-MIPS candidate generator over a fixed memory. Queries are raw h(q)
//! vectors in the memory's base dimension; indexes built on augmented memory
//! apply the zero-padding Q themselves.
class Retriever {
 public:
  virtual ~Retriever() = default;

  //! Candidate pool for `query`. Implementations that sample derive their
  //! randomness from `stream` only, so equal streams give equal pools.
  virtual CandidateSet retrieve(std::span<const double> query,
                                std::uint64_t stream) const = 0;

  virtual std::string name() const = 0;
};

//! Every memory row, in index order, unscored. Backs the full-softmax reader.
class FullRetriever final : public Retriever {
 public:
  explicit FullRetriever(std::size_t n_facts) : n_facts_(n_facts) {}
  CandidateSet retrieve(std::span<const double> query,
                        std::uint64_t stream) const override;
  std::string name() const override { return "full"; }

 private:
  std::size_t n_facts_;
};

//! Exact top-k by linear scan, scored.
class ExactRetriever final : public Retriever {
 public:
  ExactRetriever(const MemoryMatrix& memory, std::size_t k);
  CandidateSet retrieve(std::span<const double> query,
                        std::uint64_t stream) const override;
  std::string name() const override { return "exact"; }

 private:
  const MemoryMatrix* memory_;
  std::size_t k_;
};

}  // namespace hmn
