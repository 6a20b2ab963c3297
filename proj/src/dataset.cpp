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
#include "hmn/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"
#include "hmn/rng.hpp"

namespace hmn {
namespace {

// Stream ids keep each part of the generator independent of the others.
enum Stream : std::uint64_t {
  kFacts = 1,
  kKeywords = 2,
  kQuestions = 3,
  kSplit = 4,
  kQueries = 5,
};

// C(n, k), saturating at `cap`.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double c = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c >= static_cast<long double>(cap)) return cap;
  }
  return static_cast<std::size_t>(std::llround(c));
}

std::vector<float> unit_gaussian_rows(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<float> out(n * dim);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    do {
      sq = 0.0;
      for (double& x : v) {
        x = rng.normal();
        sq += x * x;
      }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] = static_cast<float>(v[j] * inv);
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_facts < 1 || dim < 1) throw ConfigError("n_facts and dim must be >= 1");
  if (keywords_per_fact < 1) throw ConfigError("keywords_per_fact must be >= 1");
  if (noise_vocab >= vocab_size) {
    throw ConfigError("noise vocabulary must leave room for keywords");
  }
  if (noise_words_per_question > 0 && noise_vocab == 0) {
    throw ConfigError("noise words requested but noise vocabulary is empty");
  }
  if (questions_per_fact < 1) throw ConfigError("questions_per_fact must be >= 1");
  if (train_fraction < 0.0 || valid_fraction < 0.0 ||
      train_fraction + valid_fraction > 1.0) {
    throw ConfigError("split fractions must be non-negative and sum to <= 1");
  }
  const std::size_t keyword_vocab = vocab_size - noise_vocab;
  if (binomial_capped(keyword_vocab, keywords_per_fact, n_facts) < n_facts) {
    throw ConfigError("cannot give " + std::to_string(n_facts) +
                      " facts unique keyword sets of size " +
                      std::to_string(keywords_per_fact) + " from " +
                      std::to_string(keyword_vocab) + " keywords");
  }
}

SyntheticData gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t keyword_vocab = cfg.vocab_size - cfg.noise_vocab;

  Rng fact_rng(mix_seed(cfg.seed, kFacts));
  MemoryMatrix memory(cfg.n_facts, cfg.dim,
                      unit_gaussian_rows(cfg.n_facts, cfg.dim, fact_rng));

  // Unique keyword set per fact, by rejection.
  Rng kw_rng(mix_seed(cfg.seed, kKeywords));
  std::set<std::vector<std::uint32_t>> used;
  std::vector<std::vector<std::uint32_t>> keywords(cfg.n_facts);
  std::vector<std::uint32_t> pool(keyword_vocab);
  std::iota(pool.begin(), pool.end(), 0u);
  const std::size_t max_attempts = 1000 * cfg.n_facts + 1000;
  std::size_t attempts = 0;
  for (std::size_t f = 0; f < cfg.n_facts; ++f) {
    for (;;) {
      if (++attempts > max_attempts) {
        throw ConfigError("keyword assignment did not find unique sets; "
                          "enlarge the keyword vocabulary");
      }
      for (std::size_t j = 0; j < cfg.keywords_per_fact; ++j) {
        const std::size_t r = j + kw_rng.below(keyword_vocab - j);
        std::swap(pool[j], pool[r]);
      }
      std::vector<std::uint32_t> set(pool.begin(),
                                     pool.begin() + static_cast<std::ptrdiff_t>(cfg.keywords_per_fact));
      std::sort(set.begin(), set.end());
      if (used.insert(set).second) {
        keywords[f] = std::move(set);
        break;
      }
    }
  }

  Rng q_rng(mix_seed(cfg.seed, kQuestions));
  std::vector<Question> all;
  all.reserve(cfg.n_facts * cfg.questions_per_fact);
  for (std::size_t f = 0; f < cfg.n_facts; ++f) {
    for (std::size_t r = 0; r < cfg.questions_per_fact; ++r) {
      Question q;
      q.gold_fact = static_cast<std::uint32_t>(f);
      q.tokens = keywords[f];
      for (std::size_t w = 0; w < cfg.noise_words_per_question; ++w) {
        q.tokens.push_back(static_cast<std::uint32_t>(keyword_vocab + q_rng.below(cfg.noise_vocab)));
      }
      q_rng.shuffle(q.tokens.begin(), q.tokens.end());
      all.push_back(std::move(q));
    }
  }

  Rng split_rng(mix_seed(cfg.seed, kSplit));
  split_rng.shuffle(all.begin(), all.end());
  const auto n_total = static_cast<double>(all.size());
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * n_total));
  const auto n_valid = std::min(all.size() - n_train,
                                static_cast<std::size_t>(std::llround(cfg.valid_fraction * n_total)));

  SyntheticData out{QaDataset{}, std::move(memory), std::move(keywords),
                    MemoryMatrix(1, 1, {0.0f})};
  QaDataset& ds = out.dataset;
  ds.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.valid.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                  all.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  ds.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), all.end());

  if (cfg.artificial_questions) {
    std::vector<std::uint8_t> covered(cfg.n_facts, 0);
    for (const Question& q : ds.train) covered[q.gold_fact] = 1;
    for (std::size_t f = 0; f < cfg.n_facts; ++f) {
      if (!covered[f]) {
        ds.train.push_back(Question{out.fact_keywords[f], static_cast<std::uint32_t>(f)});
      }
    }
  }

  ds.vocab.reserve(cfg.vocab_size);
  for (std::size_t t = 0; t < keyword_vocab; ++t) ds.vocab.push_back("k" + std::to_string(t));
  for (std::size_t t = 0; t < cfg.noise_vocab; ++t) ds.vocab.push_back("n" + std::to_string(t));

  // Benchmark queries: a random fact plus isotropic Gaussian noise.
  if (cfg.n_queries > 0) {
    Rng qr(mix_seed(cfg.seed, kQueries));
    std::vector<float> qv(cfg.n_queries * cfg.dim);
    for (std::size_t i = 0; i < cfg.n_queries; ++i) {
      const auto f = qr.below(cfg.n_facts);
      const auto row = out.memory.row(f);
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        qv[i * cfg.dim + j] = static_cast<float>(
            static_cast<double>(row[j]) +
            cfg.query_noise * qr.normal() / std::sqrt(static_cast<double>(cfg.dim)));
      }
    }
    out.queries = MemoryMatrix(cfg.n_queries, cfg.dim, std::move(qv));
  }
  return out;
}

void save_questions(const std::vector<Question>& qs, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const Question& q : qs) {
    os << q.gold_fact << '\t';
    for (std::size_t i = 0; i < q.tokens.size(); ++i) {
      if (i) os << ' ';
      os << q.tokens[i];
    }
    os << '\n';
  }
  const std::string s = os.str();
  io::write_file(path, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::vector<Question> load_questions(const std::filesystem::path& path,
                                     std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Question> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(where + ": missing tab");
    Question q;
    try {
      q.gold_fact = static_cast<std::uint32_t>(std::stoul(line.substr(0, tab)));
    } catch (const std::exception&) {
      throw FormatError(where + ": bad gold fact id");
    }
    std::istringstream toks(line.substr(tab + 1));
    std::string tok;
    while (toks >> tok) {
      unsigned long v = 0;
      try {
        v = std::stoul(tok);
      } catch (const std::exception&) {
        throw FormatError(where + ": bad token id '" + tok + "'");
      }
      if (v >= vocab_size) throw ValidationError(where + ": token id out of range");
      q.tokens.push_back(static_cast<std::uint32_t>(v));
    }
    if (q.tokens.empty()) throw FormatError(where + ": question has no tokens");
    out.push_back(std::move(q));
  }
  return out;
}

void save_vocab(const std::vector<std::string>& vocab, const std::filesystem::path& path) {
  std::string s;
  for (const auto& t : vocab) {
    s += t;
    s += '\n';
  }
  io::write_file(path, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::vector<std::string> load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_memory(data.memory, dir / "memory.hmnm");
  save_memory(data.queries, dir / "queries.hmnm");
  save_vocab(data.dataset.vocab, dir / "vocab.txt");
  save_questions(data.dataset.train, dir / "train.tsv");
  save_questions(data.dataset.valid, dir / "valid.tsv");
  save_questions(data.dataset.test, dir / "test.tsv");
}

QaDataset load_dataset(const std::filesystem::path& dir) {
  QaDataset ds;
  ds.vocab = load_vocab(dir / "vocab.txt");
  ds.train = load_questions(dir / "train.tsv", ds.vocab.size());
  ds.valid = load_questions(dir / "valid.tsv", ds.vocab.size());
  ds.test = load_questions(dir / "test.tsv", ds.vocab.size());
  return ds;
}

double recall_at_k(const CandidateSet& retrieved, const CandidateSet& exact,
                   std::size_t k) {
  if (k == 0 || k > exact.size()) {
    throw ArgumentError("recall_at_k: k must lie in [1, |exact|]");
  }
  std::vector<std::uint32_t> truth(exact.indices.begin(),
                                   exact.indices.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(truth.begin(), truth.end());
  std::vector<std::uint32_t> got = retrieved.indices;
  std::sort(got.begin(), got.end());
  got.erase(std::unique(got.begin(), got.end()), got.end());
  std::vector<std::uint32_t> both;
  std::set_intersection(truth.begin(), truth.end(), got.begin(), got.end(),
                        std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(k);
}

BenchReport bench_retriever(const Retriever& retriever, const MemoryMatrix& memory,
                            const MemoryMatrix& queries, std::size_t k) {
  if (queries.dim() != memory.dim()) {
    throw ArgumentError("query file dim does not match memory dim");
  }
  if (k == 0 || k > memory.rows()) throw ArgumentError("k must lie in [1, N]");
  BenchReport r;
  r.index_type = retriever.name();
  r.n_facts = memory.rows();
  r.n_queries = queries.rows();
  r.k = k;
  double recall_sum = 0.0;
  std::size_t candidate_sum = 0;
  double retrieve_seconds = 0.0;
  std::vector<double> q(memory.dim());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const auto row = queries.row(i);
    std::copy(row.begin(), row.end(), q.begin());
    const CandidateSet exact = k_mips_exact(q, memory, k);
    const auto t0 = std::chrono::steady_clock::now();
    const CandidateSet pool = retriever.retrieve(q, i);
    retrieve_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    recall_sum += recall_at_k(pool, exact, k);
    candidate_sum += pool.size();
  }
  const auto nq = static_cast<double>(queries.rows());
  r.recall_at_k = recall_sum / nq;
  r.mean_candidates = static_cast<double>(candidate_sum) / nq;
  r.queries_per_second = retrieve_seconds > 0.0 ? nq / retrieve_seconds : 0.0;
  r.speedup = r.mean_candidates > 0.0
                  ? static_cast<double>(memory.rows()) / r.mean_candidates
                  : 0.0;
  return r;
}

}  // namespace hmn
