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
#include "hmn/reader.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"
#include "hmn/kernels.hpp"
#include "hmn/rng.hpp"

namespace hmn {
namespace {

constexpr char kMagic[] = "HMNR";
constexpr std::uint32_t kVersion = 1;

void check_question(const ReaderModel& model, const Question& q) {
  if (q.tokens.empty()) throw ArgumentError("question has no tokens");
  for (std::uint32_t t : q.tokens) {
    if (t >= model.vocab_size) {
      throw BoundsError("token id " + std::to_string(t) + " out of range for vocab " +
                        std::to_string(model.vocab_size));
    }
  }
}

// Stable softmax in place; returns log of the normaliser relative to the max.
double softmax_inplace(std::vector<double>& s, double& max_out) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : s) top = std::max(top, v);
  double total = 0.0;
  for (double& v : s) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : s) v /= total;
  max_out = top;
  return std::log(total);
}

}  // namespace

ReaderModel::ReaderModel(std::size_t vocab, std::size_t dim)
    : vocab_size(vocab),
      embed_dim(dim),
      weights(vocab * dim, 0.0),
      first_moment(vocab * dim, 0.0),
      second_moment(vocab * dim, 0.0) {
  if (vocab == 0 || dim == 0) {
    throw ArgumentError("reader model needs a non-empty vocabulary and dim");
  }
}

ReaderModel ReaderModel::random_init(std::size_t vocab, std::size_t dim,
                                     std::uint64_t seed, double scale) {
  ReaderModel m(vocab, dim);
  Rng rng(mix_seed(seed, 0x77715fULL));
  for (double& w : m.weights) w = rng.uniform(-scale, scale);
  return m;
}

QueryVector embed_question(const ReaderModel& model, const Question& question) {
  check_question(model, question);
  QueryVector h(model.embed_dim);
  for (std::uint32_t t : question.tokens) {
    const auto e = model.embedding(t);
    for (std::size_t j = 0; j < model.embed_dim; ++j) h.values[j] += e[j];
  }
  return h;
}

std::vector<double> k_softmax(std::span<const double> q, const MemoryMatrix& m,
                              const CandidateSet& c) {
  if (c.empty()) throw ArgumentError("k_softmax over an empty candidate set");
  std::vector<double> s = score_subset(q, m, c.indices);
  double top = 0.0;
  softmax_inplace(s, top);
  return s;
}

double nll_loss(std::span<const double> probs, std::size_t gold_position) {
  if (gold_position >= probs.size()) {
    throw ContractError("gold position outside the candidate set");
  }
  return -std::log(probs[gold_position]);
}

CandidateSet assemble_candidates(std::span<const Question> batch,
                                 std::span<const QueryVector> queries,
                                 const Retriever& retriever,
                                 const MemoryMatrix& memory, std::size_t k,
                                 bool inject_gold, std::uint64_t stream) {
  if (batch.empty()) throw ArgumentError("empty minibatch");
  if (queries.size() != batch.size()) {
    throw ArgumentError("one query vector per question required");
  }
  CandidateSet out;
  std::vector<std::uint8_t> seen(memory.rows(), 0);
  auto add = [&](std::uint32_t i) {
    if (i >= memory.rows()) throw BoundsError("retrieved index out of range");
    if (!seen[i]) {
      seen[i] = 1;
      out.indices.push_back(i);
    }
  };
  for (std::size_t q = 0; q < batch.size(); ++q) {
    const CandidateSet pool = retriever.retrieve(queries[q].values, stream + q);
    if (pool.scored() || k >= pool.size()) {
      const std::size_t take = std::min(k, pool.size());
      for (std::size_t j = 0; j < take; ++j) add(pool.indices[j]);
    } else {
      const std::vector<double> s = score_subset(queries[q].values, memory, pool.indices);
      for (std::uint32_t i : select_top_k(pool.indices, s, k).indices) add(i);
    }
  }
  if (inject_gold) {
    for (const Question& q : batch) add(q.gold_fact);
  }
  return out;
}

BatchGradient backward(const ReaderModel& model, std::span<const Question> batch,
                       const CandidateSet& candidates, const MemoryMatrix& memory) {
  if (batch.empty()) throw ArgumentError("empty minibatch");
  if (candidates.empty()) throw ContractError("empty candidate set");
  if (model.embed_dim != memory.dim()) {
    throw ArgumentError("embed_dim must equal memory dim");
  }
  std::vector<std::uint32_t> support = candidates.indices;
  std::sort(support.begin(), support.end());

  const std::size_t d = model.embed_dim;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  BatchGradient out;
  out.grad.assign(model.weights.size(), 0.0);
  std::vector<double> grad_h(d);
  for (const Question& question : batch) {
    const auto gold_it =
        std::lower_bound(support.begin(), support.end(), question.gold_fact);
    if (gold_it == support.end() || *gold_it != question.gold_fact) {
      throw ContractError("gold fact " + std::to_string(question.gold_fact) +
                          " missing from the candidate set");
    }
    const auto gold = static_cast<std::size_t>(gold_it - support.begin());

    const QueryVector h = embed_question(model, question);
    std::vector<double> p = score_subset(h.values, memory, support);
    const double gold_score = p[gold];
    double top = 0.0;
    const double log_z = softmax_inplace(p, top);
    out.loss += (log_z - (gold_score - top)) * inv_batch;

    std::fill(grad_h.begin(), grad_h.end(), 0.0);
    for (std::size_t j = 0; j < support.size(); ++j) {
      const double delta = j == gold ? p[j] - 1.0 : p[j];
      kernels::axpy(delta, memory.row(support[j]), grad_h);
    }
    for (std::uint32_t t : question.tokens) {
      double* g = out.grad.data() + static_cast<std::size_t>(t) * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += grad_h[j] * inv_batch;
    }
  }
  return out;
}

void adam_step(ReaderModel& model, std::span<const double> grad) {
  if (grad.size() != model.weights.size()) {
    throw ArgumentError("gradient shape does not match W_q");
  }
  const AdamHyper& hp = model.hyper;
  ++model.timestep;
  const double t = static_cast<double>(model.timestep);
  const double c1 = 1.0 - std::pow(hp.beta1, t);
  const double c2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    double& m = model.first_moment[i];
    double& v = model.second_moment[i];
    m = hp.beta1 * m + (1.0 - hp.beta1) * g;
    v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    model.weights[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
  }
}

EvalResult evaluate(const ReaderModel& model, std::span<const Question> questions,
                    const MemoryMatrix& memory, const Retriever& retriever,
                    std::uint64_t stream) {
  EvalResult out;
  out.n_questions = questions.size();
  if (questions.empty()) return out;
  std::size_t correct = 0;
  double pooled = 0.0;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const Question& q = questions[i];
    const QueryVector h = embed_question(model, q);
    const CandidateSet pool = retriever.retrieve(h.values, stream + i);
    pooled += static_cast<double>(pool.size());
    if (pool.empty()) continue;
    std::uint32_t pred = pool.indices[0];
    if (!pool.scored()) {
      const std::vector<double> s = score_subset(h.values, memory, pool.indices);
      std::size_t best = 0;
      for (std::size_t j = 1; j < s.size(); ++j) {
        if (ranks_before(s[j], pool.indices[j], s[best], pool.indices[best])) best = j;
      }
      pred = pool.indices[best];
    }
    if (pred == q.gold_fact) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(questions.size());
  out.avg_candidates = pooled / static_cast<double>(questions.size());
  return out;
}

bool should_stop_early(std::span<const double> valid_acc, std::size_t patience) {
  if (patience == 0 || valid_acc.size() < patience + 1) return false;
  const std::size_t n = valid_acc.size();
  for (std::size_t i = n - patience; i < n; ++i) {
    if (!(valid_acc[i] < valid_acc[i - 1])) return false;
  }
  return true;
}

std::size_t best_epoch(std::span<const double> valid_acc) {
  if (valid_acc.empty()) return 0;
  const auto it = std::max_element(valid_acc.begin(), valid_acc.end());
  return static_cast<std::size_t>(it - valid_acc.begin()) + 1;
}

TrainResult train(ReaderModel model, std::span<const Question> train_set,
                  std::span<const Question> valid_set, const MemoryMatrix& memory,
                  const Retriever& train_retriever, const Retriever& eval_retriever,
                  const TrainOptions& opts,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_set.empty() || valid_set.empty()) {
    throw ArgumentError("training needs non-empty train and validation splits");
  }
  if (opts.batch_size == 0) throw ArgumentError("batch size must be >= 1");
  if (opts.k == 0) throw ArgumentError("k must be >= 1");

  TrainResult result;
  std::vector<double> accs;
  double best_acc = -1.0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Question> batch;
  std::vector<QueryVector> queries;

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng shuffle_rng(mix_seed(opts.seed, epoch));
    shuffle_rng.shuffle(order.begin(), order.end());
    const std::uint64_t epoch_stream = mix_seed(opts.seed ^ 0x5eedULL, epoch);

    double loss_sum = 0.0;
    double support_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t end = std::min(order.size(), start + opts.batch_size);
      batch.clear();
      queries.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_set[order[i]]);
        queries.push_back(embed_question(model, batch.back()));
      }
      const CandidateSet support =
          assemble_candidates(batch, queries, train_retriever, memory, opts.k,
                              /*inject_gold=*/true, epoch_stream + start);
      BatchGradient g = backward(model, batch, support, memory);
      adam_step(model, g.grad);
      loss_sum += g.loss;
      support_sum += static_cast<double>(support.size());
      ++n_batches;
    }

    const EvalResult valid = evaluate(model, valid_set, memory, eval_retriever,
                                      mix_seed(opts.seed ^ 0xe7a1ULL, epoch));
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(n_batches);
    entry.valid_acc = valid.accuracy;
    entry.avg_softmax_size = support_sum / static_cast<double>(n_batches);
    entry.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    result.log.push_back(entry);
    accs.push_back(valid.accuracy);
    if (valid.accuracy > best_acc) {
      best_acc = valid.accuracy;
      result.best_model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(entry);
    if (should_stop_early(accs, opts.patience)) break;
  }
  if (result.best_epoch == 0) result.best_model = std::move(model);
  return result;
}

void encode_model(const ReaderModel& model, io::ByteWriter& out) {
  out.magic(kMagic);
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(model.vocab_size));
  out.u32(static_cast<std::uint32_t>(model.embed_dim));
  out.u64(model.timestep);
  for (const auto* block : {&model.weights, &model.first_moment, &model.second_moment}) {
    for (double v : *block) out.f32(static_cast<float>(v));
  }
}

ReaderModel decode_model(io::ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kVersion);
  const std::size_t vocab = in.u32();
  const std::size_t dim = in.u32();
  ReaderModel model(vocab, dim);
  model.timestep = in.u64();
  in.require(3 * vocab * dim * 4);
  for (auto* block : {&model.weights, &model.first_moment, &model.second_moment}) {
    for (double& v : *block) {
      v = in.f32();
      if (!std::isfinite(v)) throw ValidationError("HMNR: non-finite parameter");
    }
  }
  return model;
}

void save_model(const ReaderModel& model, const std::filesystem::path& path) {
  io::ByteWriter out;
  encode_model(model, out);
  io::write_file(path, out.data());
}

ReaderModel load_model(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes, "HMNR reader model " + path.string());
  ReaderModel out = decode_model(in);
  in.expect_end();
  return out;
}

}  // namespace hmn
