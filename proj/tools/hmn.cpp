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
// hmn: command-line front end for data generation, index building,
// reader training, evaluation and retrieval benchmarks.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "hmn/binary_io.hpp"
#include "hmn/cluster_index.hpp"
#include "hmn/dataset.hpp"
#include "hmn/error.hpp"
#include "hmn/mcss.hpp"
#include "hmn/memory.hpp"
#include "hmn/pca_tree.hpp"
#include "hmn/reader.hpp"
#include "hmn/retriever.hpp"
#include "hmn/wta_index.hpp"

namespace {

using json = nlohmann::json;
using hmn::ArgumentError;

struct GenArgs {
  hmn::SynthConfig cfg;
  bool no_artificial = false;
  std::string out;
};

struct BuildArgs {
  std::string type;
  std::string memory;
  std::string out;
  double u = 0.83;
  std::size_t aug_terms = 3;
  std::uint64_t seed = 0;
  std::size_t clusters = 100;
  std::size_t iters = 20;
  std::size_t coarse_groups = 0;
  std::size_t hashes = 16;
  std::size_t perms = 4;
  std::size_t prefix = 4;
  std::size_t leaf_size = 2000;
};

// Flags shared by train and eval for picking a candidate retriever.
struct ReaderArgs {
  std::string reader = "full";
  std::string index;
  std::size_t k = 10;
  std::size_t top_clusters = 1;
  std::size_t eval_top_clusters = 0;
  std::size_t sample_clusters = 0;
  std::size_t rand_blocks = 0;
  std::size_t block_count = 1;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  ReaderArgs r;
  std::string memory;
  std::string data;
  std::string out;
  std::size_t batch = 128;
  double lr = 0.001;
  std::size_t epochs = 10;
  std::size_t patience = 3;
};

struct EvalArgs {
  ReaderArgs r;
  std::string model;
  std::string memory;
  std::string data;
  std::string split = "test";
};

struct BenchArgs {
  std::string index = "exact";
  std::string memory;
  std::string queries;
  std::size_t k = 10;
  std::size_t budget = 0;
  std::size_t top_clusters = 0;
  std::uint64_t seed = 0;
};

using AnyIndex = std::variant<std::monostate, hmn::ClusterIndex, hmn::WtaIndex,
                              hmn::PcaTreeIndex>;

AnyIndex load_index(const std::string& path) {
  const std::string magic = hmn::io::peek_magic(path);
  if (magic == "HMNC") return hmn::load_cluster_index(path);
  if (magic == "HMNW") return hmn::load_wta_index(path);
  if (magic == "HMNT") return hmn::load_pca_tree(path);
  throw hmn::FormatError(path + ": not an index file (magic '" + magic + "')");
}

std::string index_kind(const AnyIndex& idx) {
  switch (idx.index()) {
    case 1: return "cluster";
    case 2: return "wta";
    case 3: return "pca-tree";
    default: return "none";
  }
}

std::size_t index_aug_dim(const AnyIndex& idx) {
  if (auto* c = std::get_if<hmn::ClusterIndex>(&idx)) return c->aug_dim;
  if (auto* w = std::get_if<hmn::WtaIndex>(&idx)) return w->aug_dim;
  if (auto* t = std::get_if<hmn::PcaTreeIndex>(&idx)) return t->aug_dim;
  return 0;
}

std::size_t index_facts(const AnyIndex& idx) {
  if (auto* c = std::get_if<hmn::ClusterIndex>(&idx)) return c->n_facts();
  if (auto* w = std::get_if<hmn::WtaIndex>(&idx)) return w->n_facts;
  if (auto* t = std::get_if<hmn::PcaTreeIndex>(&idx)) {
    std::size_t n = 0;
    for (const auto& node : t->nodes) n += node.members.size();
    return n;
  }
  return 0;
}

// Train-time and test-time retrievers over a loaded index. Sampling
// (s, b) applies to training only; inference probes the top clusters.
struct Retrievers {
  AnyIndex index;
  std::unique_ptr<hmn::Retriever> train;
  std::unique_ptr<hmn::Retriever> eval;
};

std::unique_ptr<Retrievers> make_retrievers(const ReaderArgs& a,
                                            const hmn::MemoryMatrix& memory) {
  auto out = std::make_unique<Retrievers>();
  const std::size_t n = memory.rows();
  if (a.reader == "full") {
    out->train = std::make_unique<hmn::FullRetriever>(n);
    out->eval = std::make_unique<hmn::FullRetriever>(n);
    return out;
  }
  if (a.reader == "exact") {
    if (a.k == 0 || a.k > n) throw ArgumentError("--k must lie in [1, N]");
    out->train = std::make_unique<hmn::ExactRetriever>(memory, a.k);
    out->eval = std::make_unique<hmn::ExactRetriever>(memory, a.k);
    return out;
  }
  if (a.reader != "cluster" && a.reader != "wta" && a.reader != "pca-tree") {
    throw ArgumentError("unknown reader '" + a.reader + "'");
  }
  if (a.index.empty()) throw ArgumentError("--reader " + a.reader + " needs --index");
  out->index = load_index(a.index);
  if (index_kind(out->index) != a.reader) {
    throw ArgumentError("--index holds a " + index_kind(out->index) +
                        " index but --reader is " + a.reader);
  }
  if (index_facts(out->index) != n) {
    throw ArgumentError("index was built for a different memory size");
  }
  if (index_aug_dim(out->index) <= memory.dim()) {
    throw ArgumentError("index dimension does not extend the memory dimension");
  }
  const std::size_t d = memory.dim();
  if (auto* c = std::get_if<hmn::ClusterIndex>(&out->index)) {
    hmn::RetrievalStrategy train_s;
    train_s.top_clusters = a.top_clusters;
    train_s.sampled_clusters = a.sample_clusters;
    train_s.rand_blocks = a.rand_blocks;
    train_s.block_count = a.block_count;
    train_s.rng_seed = a.seed;
    hmn::RetrievalStrategy eval_s;
    eval_s.top_clusters = a.eval_top_clusters ? a.eval_top_clusters : a.top_clusters;
    eval_s.rng_seed = a.seed;
    out->train = std::make_unique<hmn::ClusterRetriever>(*c, d, train_s);
    out->eval = std::make_unique<hmn::ClusterRetriever>(*c, d, eval_s);
  } else if (auto* w = std::get_if<hmn::WtaIndex>(&out->index)) {
    const std::size_t budget = a.budget ? a.budget : n;
    out->train = std::make_unique<hmn::WtaRetriever>(*w, d, budget);
    out->eval = std::make_unique<hmn::WtaRetriever>(*w, d, budget);
  } else if (auto* t = std::get_if<hmn::PcaTreeIndex>(&out->index)) {
    out->train = std::make_unique<hmn::PcaTreeRetriever>(*t, d);
    out->eval = std::make_unique<hmn::PcaTreeRetriever>(*t, d);
  }
  return out;
}

void check_gold(const hmn::QaDataset& ds, std::size_t n_facts) {
  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const auto& q : *split) {
      if (q.gold_fact >= n_facts) {
        throw hmn::ValidationError("question gold fact " + std::to_string(q.gold_fact) +
                                   " is outside the memory");
      }
    }
  }
}

void add_reader_flags(CLI::App* cmd, ReaderArgs& r) {
  cmd->add_option("--reader", r.reader, "full|exact|cluster|wta|pca-tree")
      ->check(CLI::IsMember({"full", "exact", "cluster", "wta", "pca-tree"}));
  cmd->add_option("--index", r.index, "Index file for approximate readers");
  cmd->add_option("--k", r.k, "Top-k kept per question");
  cmd->add_option("--top-clusters", r.top_clusters, "Top clusters probed");
  cmd->add_option("--eval-top-clusters", r.eval_top_clusters,
                  "Clusters probed at inference (default: --top-clusters)");
  cmd->add_option("--sample-clusters", r.sample_clusters, "Clusters sampled during training");
  cmd->add_option("--rand-blocks", r.rand_blocks, "Random blocks added during training");
  cmd->add_option("--block-count", r.block_count, "Number of memory blocks");
  cmd->add_option("--budget", r.budget, "Candidate cap for hash retrieval");
}

int run_gen(const GenArgs& a) {
  hmn::SynthConfig cfg = a.cfg;
  cfg.artificial_questions = !a.no_artificial;
  const hmn::SyntheticData data = hmn::gen_synthetic(cfg);
  hmn::write_synthetic(data, a.out);
  json r = {{"facts", data.memory.rows()},
            {"dim", data.memory.dim()},
            {"vocab", data.dataset.vocab.size()},
            {"train", data.dataset.train.size()},
            {"valid", data.dataset.valid.size()},
            {"test", data.dataset.test.size()},
            {"queries", data.queries.rows()}};
  std::cout << r.dump() << "\n";
  return 0;
}

int run_build(const BuildArgs& a) {
  const hmn::MemoryMatrix memory = hmn::load_memory(a.memory);
  hmn::McssConfig mc{a.u, a.aug_terms};
  mc.validate();
  const hmn::AugmentedMemory am = hmn::augment_memory(memory, mc);
  json r = {{"type", a.type}, {"facts", memory.rows()}, {"aug_dim", am.aug_dim()},
            {"scale_factor", am.scale_factor}};
  if (a.type == "cluster") {
    hmn::ClusterBuildOptions o;
    o.n_clusters = a.clusters;
    o.max_iters = a.iters;
    o.seed = a.seed;
    o.coarse_groups = a.coarse_groups;
    hmn::ClusterBuildTrace trace;
    const hmn::ClusterIndex idx = hmn::build_cluster_index(am, o, &trace);
    hmn::save_cluster_index(idx, a.out);
    r["clusters"] = idx.n_clusters;
    r["iterations"] = trace.iterations;
    r["converged"] = trace.converged;
  } else if (a.type == "wta") {
    hmn::WtaBuildOptions o{a.hashes, a.perms, a.prefix, a.seed};
    const hmn::WtaIndex idx = hmn::build_wta_index(am, o);
    hmn::save_wta_index(idx, a.out);
    std::size_t buckets = 0;
    for (const auto& t : idx.tables) buckets += t.size();
    r["hashes"] = idx.n_hashes;
    r["buckets"] = buckets;
  } else {
    const hmn::PcaTreeIndex idx = hmn::build_pca_tree(am, a.leaf_size, a.seed);
    hmn::save_pca_tree(idx, a.out);
    std::size_t leaves = 0;
    for (const auto& node : idx.nodes) leaves += node.is_leaf ? 1 : 0;
    r["leaves"] = leaves;
  }
  std::cout << r.dump() << "\n";
  return 0;
}

int run_train(TrainArgs a) {
  const hmn::MemoryMatrix memory = hmn::load_memory(a.memory);
  const hmn::QaDataset ds = hmn::load_dataset(a.data);
  check_gold(ds, memory.rows());
  if (a.r.reader == "full") a.r.k = memory.rows();
  auto rs = make_retrievers(a.r, memory);

  hmn::ReaderModel model = hmn::ReaderModel::random_init(ds.vocab.size(), memory.dim(), a.r.seed);
  model.hyper.lr = a.lr;
  hmn::TrainOptions o;
  o.k = a.r.k;
  o.epochs = a.epochs;
  o.batch_size = a.batch;
  o.seed = a.r.seed;
  o.patience = a.patience;
  const hmn::TrainResult res = hmn::train(
      std::move(model), ds.train, ds.valid, memory, *rs->train, *rs->eval, o,
      [](const hmn::EpochLog& e) {
        json line = {{"epoch", e.epoch},
                     {"train_loss", e.train_loss},
                     {"valid_acc", e.valid_acc},
                     {"avg_softmax_size", e.avg_softmax_size},
                     {"wall_ms", e.wall_ms}};
        std::cout << line.dump() << std::endl;
      });
  hmn::save_model(res.best_model, a.out);
  return 0;
}

int run_eval(EvalArgs a) {
  const hmn::MemoryMatrix memory = hmn::load_memory(a.memory);
  const hmn::QaDataset ds = hmn::load_dataset(a.data);
  check_gold(ds, memory.rows());
  const hmn::ReaderModel model = hmn::load_model(a.model);
  if (model.vocab_size != ds.vocab.size() || model.embed_dim != memory.dim()) {
    throw ArgumentError("model shape does not match vocabulary and memory");
  }
  if (a.r.reader == "full") a.r.k = memory.rows();
  auto rs = make_retrievers(a.r, memory);
  const auto& qs = a.split == "train" ? ds.train : a.split == "valid" ? ds.valid : ds.test;
  const hmn::EvalResult e = hmn::evaluate(model, qs, memory, *rs->eval, a.r.seed);
  json r = {{"reader", a.r.reader},
            {"split", a.split},
            {"questions", e.n_questions},
            {"accuracy", e.accuracy},
            {"avg_candidates", e.avg_candidates}};
  std::cout << r.dump() << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  const hmn::MemoryMatrix memory = hmn::load_memory(a.memory);
  const hmn::MemoryMatrix queries = hmn::load_memory(a.queries);
  const std::size_t n = memory.rows();
  AnyIndex idx;
  std::unique_ptr<hmn::Retriever> ret;
  if (a.index == "exact") {
    ret = std::make_unique<hmn::FullRetriever>(n);
  } else {
    idx = load_index(a.index);
    if (index_facts(idx) != n) throw ArgumentError("index was built for a different memory size");
    if (index_aug_dim(idx) <= memory.dim()) {
      throw ArgumentError("index dimension does not extend the memory dimension");
    }
    const std::size_t budget = a.budget ? a.budget : n;
    if (auto* c = std::get_if<hmn::ClusterIndex>(&idx)) {
      hmn::RetrievalStrategy s;
      s.top_clusters = a.top_clusters ? a.top_clusters : hmn::top_clusters_for_budget(*c, budget);
      s.rng_seed = a.seed;
      ret = std::make_unique<hmn::ClusterRetriever>(*c, memory.dim(), s);
    } else if (auto* w = std::get_if<hmn::WtaIndex>(&idx)) {
      ret = std::make_unique<hmn::WtaRetriever>(*w, memory.dim(), budget);
    } else if (auto* t = std::get_if<hmn::PcaTreeIndex>(&idx)) {
      ret = std::make_unique<hmn::PcaTreeRetriever>(*t, memory.dim());
    }
  }
  const hmn::BenchReport b = hmn::bench_retriever(*ret, memory, queries, a.k);
  json r = {{"index_type", a.index == "exact" ? std::string("exact") : b.index_type},
            {"facts", b.n_facts},
            {"queries", b.n_queries},
            {"k", b.k},
            {"budget", a.budget},
            {"recall_at_k", b.recall_at_k},
            {"mean_candidates", b.mean_candidates},
            {"queries_per_second", b.queries_per_second},
            {"speedup", b.speedup}};
  std::cout << r.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical memory networks: K-MIPS attention toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic factoid-QA dataset");
  g->add_option("--facts", gen.cfg.n_facts, "Number of facts");
  g->add_option("--dim", gen.cfg.dim, "Fact vector dimension");
  g->add_option("--vocab", gen.cfg.vocab_size, "Vocabulary size");
  g->add_option("--noise-vocab", gen.cfg.noise_vocab, "Noise tokens inside the vocabulary");
  g->add_option("--keywords", gen.cfg.keywords_per_fact, "Keywords per fact");
  g->add_option("--noise", gen.cfg.noise_words_per_question, "Noise words per question");
  g->add_option("--questions-per-fact", gen.cfg.questions_per_fact, "Questions per fact");
  g->add_option("--queries", gen.cfg.n_queries, "Benchmark query rows");
  g->add_option("--query-noise", gen.cfg.query_noise, "Perturbation of benchmark queries");
  g->add_flag("--no-artificial", gen.no_artificial, "Skip keywords-only train questions");
  g->add_option("--seed", gen.cfg.seed, "Seed");
  g->add_option("--out", gen.out, "Output directory")->required();

  BuildArgs build;
  auto* b = app.add_subcommand("build-index", "Build a retrieval index over a memory");
  b->add_option("--type", build.type, "cluster|wta|pca-tree")
      ->required()
      ->check(CLI::IsMember({"cluster", "wta", "pca-tree"}));
  b->add_option("--memory", build.memory, "HMNM memory file")->required();
  b->add_option("--u", build.u, "Norm bound after scaling");
  b->add_option("--aug-terms", build.aug_terms, "Augmentation terms");
  b->add_option("--seed", build.seed, "Seed");
  b->add_option("--out", build.out, "Output index file")->required();
  b->add_option("--clusters", build.clusters, "Clusters");
  b->add_option("--iters", build.iters, "Max k-means iterations");
  b->add_option("--coarse-groups", build.coarse_groups, "Second-level groups (0 = flat)");
  b->add_option("--hashes", build.hashes, "Hash functions");
  b->add_option("--perms", build.perms, "Permutations per hash");
  b->add_option("--prefix", build.prefix, "Prefix length");
  b->add_option("--leaf-size", build.leaf_size, "Target leaf size");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the attention reader");
  t->add_option("--memory", tr.memory, "HMNM memory file")->required();
  t->add_option("--data", tr.data, "Dataset directory")->required();
  add_reader_flags(t, tr.r);
  t->add_option("--batch", tr.batch, "Minibatch size");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--epochs", tr.epochs, "Max epochs");
  t->add_option("--patience", tr.patience, "Consecutive validation drops before stopping");
  t->add_option("--seed", tr.r.seed, "Seed");
  t->add_option("--out", tr.out, "Output model file")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a trained reader");
  e->add_option("--model", ev.model, "HMNR model file")->required();
  e->add_option("--memory", ev.memory, "HMNM memory file")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--split", ev.split, "train|valid|test")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  e->add_option("--seed", ev.r.seed, "Seed");
  add_reader_flags(e, ev.r);

  BenchArgs be;
  auto* bn = app.add_subcommand("bench", "Benchmark retrieval against brute force");
  bn->add_option("--index", be.index, "Index file, or 'exact'");
  bn->add_option("--memory", be.memory, "HMNM memory file")->required();
  bn->add_option("--queries", be.queries, "HMNM file of query vectors")->required();
  bn->add_option("--k", be.k, "Recall depth");
  bn->add_option("--budget", be.budget, "Target candidates per query");
  bn->add_option("--top-clusters", be.top_clusters, "Override probed clusters");
  bn->add_option("--seed", be.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);
    std::fprintf(stderr, "hmn: %s\n", err.what());
    return 2;
  }

  try {
    if (*g) return run_gen(gen);
    if (*b) return run_build(build);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*bn) return run_bench(be);
  } catch (const hmn::Error& err) {
    std::fprintf(stderr, "hmn: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "hmn: %s\n", err.what());
    return 1;
  }
  return 1;
}
