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
#include <string>
#include <vector>

#include "hmn/memory.hpp"
#include "hmn/reader.hpp"

namespace hmn {

//! Synthetic factoid-QA generator settings. Token ids [0, vocab_size -
//! noise_vocab) are keywords, the rest are noise words.
struct SynthConfig {
  std::size_t n_facts = 10000;
  std::size_t dim = 32;
  std::size_t vocab_size = 5000;
  std::size_t noise_vocab = 1000;
  std::size_t keywords_per_fact = 2;
  std::size_t noise_words_per_question = 2;
  std::size_t questions_per_fact = 1;
  double train_fraction = 0.8;
  double valid_fraction = 0.1;
  bool artificial_questions = true;
  //! Rows of the benchmark query file written next to the dataset.
  std::size_t n_queries = 1000;
  //! Std-dev of the Gaussian perturbation applied to a fact to form a query.
  double query_noise = 0.5;
  std::uint64_t seed = 0;

  //! Throws ConfigError on an impossible configuration.
  void validate() const;
};

struct QaDataset {
  std::vector<std::string> vocab;
  std::vector<Question> train;
  std::vector<Question> valid;
  std::vector<Question> test;
};

struct SyntheticData {
  QaDataset dataset;
  MemoryMatrix memory;
  //! Sorted keyword token ids of every fact.
  std::vector<std::vector<std::uint32_t>> fact_keywords;
  //! Benchmark queries, n_queries x dim.
  MemoryMatrix queries;
};

SyntheticData gen_synthetic(const SynthConfig& cfg);

//! Writes memory.hmnm, queries.hmnm, vocab.txt, train.tsv, valid.tsv and
//! test.tsv into `dir` (created if needed).
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

void save_questions(const std::vector<Question>& qs, const std::filesystem::path& path);
std::vector<Question> load_questions(const std::filesystem::path& path,
                                     std::size_t vocab_size);
void save_vocab(const std::vector<std::string>& vocab, const std::filesystem::path& path);
std::vector<std::string> load_vocab(const std::filesystem::path& path);

//! Loads vocab.txt and the three question splits from `dir`.
QaDataset load_dataset(const std::filesystem::path& dir);

//! |retrieved ∩ top-k(exact)| / k. Requires k <= |exact|, with `exact` ranked.
double recall_at_k(const CandidateSet& retrieved, const CandidateSet& exact,
                   std::size_t k);

struct BenchReport {
  std::string index_type;
  std::size_t n_facts = 0;
  std::size_t n_queries = 0;
  std::size_t k = 0;
  double recall_at_k = 0.0;
  double mean_candidates = 0.0;
  double queries_per_second = 0.0;
  double speedup = 0.0;
};

//! Recall against brute-force K-MIPS, mean pool size, throughput, and
//! speedup = N / mean pool size. Query i uses retriever stream i.
BenchReport bench_retriever(const Retriever& retriever, const MemoryMatrix& memory,
                            const MemoryMatrix& queries, std::size_t k);

}  // namespace hmn
