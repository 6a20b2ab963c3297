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
#include <functional>
#include <span>
#include <vector>

#include "hmn/memory.hpp"
#include "hmn/retriever.hpp"

namespace hmn {

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

//! Question-word embedding table W_q with Adam state. Parameters are held in
//! double precision; the model file stores them as binary32.
struct ReaderModel {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::vector<double> weights;        // vocab_size x embed_dim
  std::vector<double> first_moment;   // same shape
  std::vector<double> second_moment;  // same shape
  std::uint64_t timestep = 0;
  AdamHyper hyper;

  ReaderModel() = default;
  //! Zero weights and moments.
  ReaderModel(std::size_t vocab_size, std::size_t embed_dim);

  //! Weights uniform in [-scale, scale].
  static ReaderModel random_init(std::size_t vocab_size, std::size_t embed_dim,
                                 std::uint64_t seed, double scale = 0.08);

  std::span<const double> embedding(std::size_t token) const {
    return {weights.data() + token * embed_dim, embed_dim};
  }
  std::span<double> embedding(std::size_t token) {
    return {weights.data() + token * embed_dim, embed_dim};
  }
};

struct Question {
  std::vector<std::uint32_t> tokens;
  std::uint32_t gold_fact = 0;

  friend bool operator==(const Question&, const Question&) = default;
};

//! h(q): sum of the token embeddings, with multiplicity.
QueryVector embed_question(const ReaderModel& model, const Question& question);

//! Softmax of q . M[c] over the candidates, in candidate order.
std::vector<double> k_softmax(std::span<const double> q, const MemoryMatrix& m,
                              const CandidateSet& c);

//! -ln probs[gold_position].
double nll_loss(std::span<const double> probs, std::size_t gold_position);

//! Shared softmax support for a minibatch: union (first occurrence order) of
//! every question's top-k retrieved rows, plus each gold fact when
//! `inject_gold` is set. Question i draws retriever randomness from
//! `stream + i`.
CandidateSet assemble_candidates(std::span<const Question> batch,
                                 std::span<const QueryVector> queries,
                                 const Retriever& retriever,
                                 const MemoryMatrix& memory, std::size_t k,
                                 bool inject_gold, std::uint64_t stream = 0);

struct BatchGradient {
  double loss = 0.0;         // mean NLL over the batch
  std::vector<double> grad;  // d loss / d W_q, vocab_size x embed_dim
};

//! Forward and backward over one minibatch sharing `candidates`. The
//! computation runs over the candidates in ascending row order, so the result
//! does not depend on how the support was assembled. Throws ContractError
//! when a gold fact is missing from the support.
BatchGradient backward(const ReaderModel& model, std::span<const Question> batch,
                       const CandidateSet& candidates, const MemoryMatrix& memory);

//! One Adam update with bias correction.
void adam_step(ReaderModel& model, std::span<const double> grad);

struct EvalResult {
  double accuracy = 0.0;        // fraction in [0, 1]
  double avg_candidates = 0.0;  // mean retrieved pool size
  std::size_t n_questions = 0;
};

//! Prediction is the highest-scoring retrieved row; no gold injection, so a
//! question whose gold fact is not retrieved counts as wrong.
EvalResult evaluate(const ReaderModel& model, std::span<const Question> questions,
                    const MemoryMatrix& memory, const Retriever& retriever,
                    std::uint64_t stream = 0);

struct TrainOptions {
  std::size_t k = 10;
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  //! Stop after this many consecutive strict drops in validation accuracy.
  std::size_t patience = 3;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_acc = 0.0;
  double avg_softmax_size = 0.0;
  double wall_ms = 0.0;

  //! Equality on the deterministic fields (wall_ms excluded).
  bool same_metrics(const EpochLog& o) const {
    return epoch == o.epoch && train_loss == o.train_loss &&
           valid_acc == o.valid_acc && avg_softmax_size == o.avg_softmax_size;
  }
};

struct TrainResult {
  std::vector<EpochLog> log;
  ReaderModel best_model;
  std::size_t best_epoch = 0;  // 1-based
};

//! True when the last `patience` accuracies each fell strictly below their
//! predecessor.
bool should_stop_early(std::span<const double> valid_acc, std::size_t patience);

//! 1-based epoch of the first maximum.
std::size_t best_epoch(std::span<const double> valid_acc);

//! Minibatch training with gold injection. `train_retriever` builds the
//! per-question candidates, `eval_retriever` drives validation accuracy.
TrainResult train(ReaderModel model, std::span<const Question> train_set,
                  std::span<const Question> valid_set, const MemoryMatrix& memory,
                  const Retriever& train_retriever, const Retriever& eval_retriever,
                  const TrainOptions& opts,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

void encode_model(const ReaderModel& model, io::ByteWriter& out);
ReaderModel decode_model(io::ByteReader& in);
void save_model(const ReaderModel& model, const std::filesystem::path& path);
ReaderModel load_model(const std::filesystem::path& path);

}  // namespace hmn
