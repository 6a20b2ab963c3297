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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "hmn/cluster_index.hpp"
#include "hmn/dataset.hpp"
#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"
#include "test_util.hpp"

namespace hmn {
namespace {

using testing::TempDir;

SynthConfig small_config() {
  SynthConfig c;
  c.n_facts = 200;
  c.dim = 8;
  c.vocab_size = 300;
  c.noise_vocab = 50;
  c.n_queries = 20;
  c.seed = 3;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(GenSynthetic, ShapeAndHeader) {
  SynthConfig c = small_config();
  c.n_facts = 10;
  c.dim = 4;
  c.vocab_size = 40;
  c.noise_vocab = 10;
  const SyntheticData d = gen_synthetic(c);
  EXPECT_EQ(d.memory.rows(), 10u);
  EXPECT_EQ(d.memory.dim(), 4u);
  TempDir dir;
  write_synthetic(d, dir.path());
  const MemoryMatrix m = load_memory(dir / "memory.hmnm");
  EXPECT_EQ(m.rows(), 10u);
  EXPECT_EQ(m.dim(), 4u);
}

TEST(GenSynthetic, UnitRowsUniqueKeywordSetsAndSplits) {
  const SynthConfig c = small_config();
  const SyntheticData d = gen_synthetic(c);
  for (std::size_t i = 0; i < d.memory.rows(); ++i) {
    double n = 0.0;
    for (float x : d.memory.row(i)) n += static_cast<double>(x) * x;
    EXPECT_NEAR(n, 1.0, 1e-6);
  }
  const std::set<std::vector<std::uint32_t>> sets(d.fact_keywords.begin(), d.fact_keywords.end());
  EXPECT_EQ(sets.size(), c.n_facts);
  const std::size_t kv = c.vocab_size - c.noise_vocab;
  for (const auto& s : d.fact_keywords) {
    EXPECT_EQ(s.size(), c.keywords_per_fact);
    for (auto t : s) EXPECT_LT(t, kv);
  }
  const auto& ds = d.dataset;
  EXPECT_EQ(ds.valid.size(), 20u);
  EXPECT_EQ(ds.test.size(), 20u);
  // Every fact has a train question, either natural or keywords-only.
  std::set<std::uint32_t> covered;
  for (const auto& q : ds.train) covered.insert(q.gold_fact);
  EXPECT_EQ(covered.size(), c.n_facts);
  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const auto& q : *split) {
      EXPECT_LT(q.gold_fact, c.n_facts);
      std::size_t noise = 0;
      for (auto t : q.tokens) {
        EXPECT_LT(t, c.vocab_size);
        noise += t >= kv;
      }
      auto kw = q.tokens;
      kw.erase(std::remove_if(kw.begin(), kw.end(), [&](auto t) { return t >= kv; }), kw.end());
      std::sort(kw.begin(), kw.end());
      EXPECT_EQ(kw, d.fact_keywords[q.gold_fact]);
      EXPECT_TRUE(noise == c.noise_words_per_question || noise == 0);
    }
  }
  EXPECT_EQ(ds.train.size(), 160u + (200u - 160u));
  EXPECT_EQ(ds.vocab.size(), c.vocab_size);
}

TEST(GenSynthetic, NoArtificialQuestions) {
  SynthConfig c = small_config();
  c.artificial_questions = false;
  EXPECT_EQ(gen_synthetic(c).dataset.train.size(), 160u);
}

TEST(GenSynthetic, SameSeedSameBytes) {
  TempDir a, b, other;
  write_synthetic(gen_synthetic(small_config()), a.path());
  write_synthetic(gen_synthetic(small_config()), b.path());
  SynthConfig c = small_config();
  c.seed = 4;
  write_synthetic(gen_synthetic(c), other.path());
  for (const char* f : {"memory.hmnm", "queries.hmnm", "vocab.txt", "train.tsv", "valid.tsv", "test.tsv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "memory.hmnm"), slurp(other / "memory.hmnm"));
  EXPECT_NE(slurp(a / "train.tsv"), slurp(other / "train.tsv"));
}

TEST(GenSynthetic, ZeroNoiseTokenSetsIdentifyFacts) {
  SynthConfig c = small_config();
  c.noise_words_per_question = 0;
  const SyntheticData d = gen_synthetic(c);
  std::map<std::vector<std::uint32_t>, std::uint32_t> owner;
  for (const auto* split : {&d.dataset.train, &d.dataset.valid, &d.dataset.test}) {
    for (const auto& q : *split) {
      auto key = q.tokens;
      std::sort(key.begin(), key.end());
      const auto [it, fresh] = owner.emplace(key, q.gold_fact);
      EXPECT_EQ(it->second, q.gold_fact);
    }
  }
}

TEST(GenSynthetic, SeparableByOracleReader) {
  // One unique keyword per fact, no noise: mapping each keyword embedding to
  // its fact vector must answer every question.
  SynthConfig c = small_config();
  c.keywords_per_fact = 1;
  c.noise_words_per_question = 0;
  c.noise_vocab = 0;
  c.vocab_size = c.n_facts;
  const SyntheticData d = gen_synthetic(c);
  ReaderModel oracle(c.vocab_size, c.dim);
  for (std::size_t f = 0; f < c.n_facts; ++f) {
    const auto row = d.memory.row(f);
    auto e = oracle.embedding(d.fact_keywords[f][0]);
    std::copy(row.begin(), row.end(), e.begin());
  }
  const FullRetriever full(c.n_facts);
  for (const auto* split : {&d.dataset.train, &d.dataset.valid, &d.dataset.test}) {
    EXPECT_EQ(evaluate(oracle, *split, d.memory, full).accuracy, 1.0);
  }
}

TEST(GenSynthetic, ConfigErrors) {
  SynthConfig c = small_config();
  c.keywords_per_fact = 0;
  EXPECT_THROW(gen_synthetic(c), ConfigError);
  c = small_config();
  c.vocab_size = 60;
  c.noise_vocab = 50;
  c.keywords_per_fact = 1;  // 10 keywords cannot label 200 facts
  EXPECT_THROW(gen_synthetic(c), ConfigError);
  c = small_config();
  c.noise_vocab = c.vocab_size;
  EXPECT_THROW(gen_synthetic(c), ConfigError);
  c = small_config();
  c.train_fraction = 0.95;
  c.valid_fraction = 0.1;
  EXPECT_THROW(gen_synthetic(c), ConfigError);
}

TEST(DatasetFiles, RoundTripAndValidation) {
  TempDir dir;
  const SyntheticData d = gen_synthetic(small_config());
  write_synthetic(d, dir.path());
  const QaDataset back = load_dataset(dir.path());
  EXPECT_EQ(back.vocab, d.dataset.vocab);
  EXPECT_EQ(back.train, d.dataset.train);
  EXPECT_EQ(back.valid, d.dataset.valid);
  EXPECT_EQ(back.test, d.dataset.test);

  std::ofstream(dir / "bad1.tsv") << "3 1 2\n";
  EXPECT_THROW(load_questions(dir / "bad1.tsv", 10), FormatError);
  std::ofstream(dir / "bad2.tsv") << "3\t1 99\n";
  EXPECT_THROW(load_questions(dir / "bad2.tsv", 10), ValidationError);
  std::ofstream(dir / "bad3.tsv") << "x\t1\n";
  EXPECT_THROW(load_questions(dir / "bad3.tsv", 10), FormatError);
  std::ofstream(dir / "bad4.tsv") << "2\t\n";
  EXPECT_THROW(load_questions(dir / "bad4.tsv", 10), FormatError);
  EXPECT_THROW(load_questions(dir / "missing.tsv", 10), IoError);
}

TEST(RecallAtK, HandExamples) {
  CandidateSet exact;
  exact.indices = {1, 2, 3, 9};
  CandidateSet got;
  got.indices = {1, 3, 5};
  EXPECT_NEAR(recall_at_k(got, exact, 3), 2.0 / 3.0, 1e-15);
  got.indices = {0, 1, 2, 3, 4};
  EXPECT_EQ(recall_at_k(got, exact, 3), 1.0);
  got.indices = {7, 8};
  EXPECT_EQ(recall_at_k(got, exact, 3), 0.0);
  EXPECT_THROW(recall_at_k(got, exact, 5), ArgumentError);
  EXPECT_THROW(recall_at_k(got, exact, 0), ArgumentError);
}

TEST(Bench, ExactRetrieverIsPerfect) {
  const SyntheticData d = gen_synthetic(small_config());
  const FullRetriever full(d.memory.rows());
  const BenchReport r = bench_retriever(full, d.memory, d.queries, 10);
  EXPECT_EQ(r.recall_at_k, 1.0);
  EXPECT_EQ(r.mean_candidates, 200.0);
  EXPECT_EQ(r.speedup, 1.0);
  EXPECT_EQ(r.n_queries, 20u);
}

TEST(Bench, AllClustersIsPerfectAndCountsAreExact) {
  const SyntheticData d = gen_synthetic(small_config());
  const McssConfig cfg;
  const AugmentedMemory am = augment_memory(d.memory, cfg);
  const ClusterIndex idx = build_cluster_index(am, {8, 10, 1, 0});
  RetrievalStrategy all;
  all.top_clusters = 8;
  EXPECT_EQ(bench_retriever(ClusterRetriever(idx, 8, all), d.memory, d.queries, 10).recall_at_k, 1.0);

  RetrievalStrategy two;
  two.top_clusters = 2;
  const ClusterRetriever r(idx, 8, two);
  const BenchReport rep = bench_retriever(r, d.memory, d.queries, 10);
  double total = 0.0;
  for (std::size_t i = 0; i < d.queries.rows(); ++i) {
    const auto row = d.queries.row(i);
    total += static_cast<double>(r.retrieve(std::vector<double>(row.begin(), row.end()), i).size());
  }
  EXPECT_EQ(rep.mean_candidates, total / 20.0);
  EXPECT_DOUBLE_EQ(rep.speedup, 200.0 / rep.mean_candidates);
}

TEST(Bench, DimMismatch) {
  const SyntheticData d = gen_synthetic(small_config());
  const FullRetriever full(d.memory.rows());
  const MemoryMatrix q = testing::random_memory(3, 5, 1);
  EXPECT_THROW(bench_retriever(full, d.memory, q, 10), ArgumentError);
}

}  // namespace
}  // namespace hmn
