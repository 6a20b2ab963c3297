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
// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --cli PATH [--work DIR] [criterion ...]
//
// With no criterion numbers every criterion runs. Exit status is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hmn/binary_io.hpp"
#include "hmn/cluster_index.hpp"
#include "hmn/dataset.hpp"
#include "hmn/error.hpp"
#include "hmn/exact_kmips.hpp"
#include "hmn/mcss.hpp"
#include "hmn/memory.hpp"
#include "hmn/pca_tree.hpp"
#include "hmn/reader.hpp"
#include "hmn/retriever.hpp"
#include "hmn/rng.hpp"
#include "hmn/wta_index.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Tolerances and budgets, one block per criterion.
constexpr double kC1RelTol = 1e-6;
constexpr double kC1NormSlack = 1e-6;
constexpr double kC1Seconds = 1.0;
constexpr double kC2Seconds = 5.0;
constexpr double kC3MaxRelErr = 1e-6;
constexpr double kC3Step = 1e-4;
constexpr double kC3Seconds = 10.0;
constexpr std::size_t kC4Epochs = 3;
constexpr double kC5AccSlack = 0.01;
constexpr double kC5SizeFraction = 0.15;
constexpr double kC5Seconds = 15 * 60.0;
constexpr double kC6BudgetSlack = 0.10;
constexpr double kC6MinGap = 0.03;
constexpr double kC6Seconds = 5 * 60.0;
constexpr double kC7BudgetSlack = 0.10;
constexpr double kC7Seconds = 45 * 60.0;
constexpr double kC9Target = 5.0;
constexpr double kC9Slack = 0.5;

// Shared protocol settings for the training trends.
constexpr std::uint64_t kDataSeed = 1;
constexpr double kTrendLr = 0.05;
constexpr std::size_t kTrendMaxEpochs = 60;
constexpr std::size_t kClusters = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct Env {
  std::string cli;
  fs::path work;
  std::optional<hmn::SyntheticData> data;

  const hmn::SyntheticData& dataset() {
    if (!data) {
      hmn::SynthConfig cfg;
      cfg.seed = kDataSeed;
      data = hmn::gen_synthetic(cfg);
    }
    return *data;
  }
};

std::vector<double> to_double(std::span<const float> r) { return {r.begin(), r.end()}; }

// ---------------------------------------------------------------- 1
Outcome criterion1(Env&) {
  Timer timer;
  const std::size_t d = 32, n = 1000;
  hmn::Rng rng(101);
  std::vector<float> xs(n * d);
  for (float& v : xs) v = static_cast<float>(rng.normal());
  const hmn::MemoryMatrix m(n, d, xs);
  const hmn::McssConfig cfg{0.83, 3};
  const double scale = hmn::fit_scale(m, cfg);
  const hmn::AugmentedMemory am = hmn::augment_memory(m, cfg);

  double worst_rel = 0.0, worst_norm = -1.0, worst_stored = 0.0;
  const double bound = std::pow(0.83, 16) + kC1NormSlack;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> q(d);
    for (double& v : q) v = rng.normal();
    std::vector<double> xsc(d);
    for (std::size_t j = 0; j < d; ++j) xsc[j] = scale * static_cast<double>(m.row(i)[j]);
    const std::vector<double> p = hmn::augment_vector(xsc, cfg.aug_terms);
    const hmn::QueryVector qa = hmn::augment_query(q, cfg);
    long double lhs = 0.0L, raw = 0.0L, p2 = 0.0L;
    for (std::size_t j = 0; j < p.size(); ++j) {
      lhs += static_cast<long double>(qa.values[j]) * p[j];
      p2 += static_cast<long double>(p[j]) * p[j];
    }
    for (std::size_t j = 0; j < d; ++j) raw += static_cast<long double>(q[j]) * m.row(i)[j];
    const double rhs = scale * static_cast<double>(raw);
    worst_rel = std::max(worst_rel, std::abs(static_cast<double>(lhs) - rhs) /
                                        std::max(std::abs(rhs), 1e-300));
    worst_norm = std::max(worst_norm, static_cast<double>(p2) - cfg.aug_terms / 4.0);
    // Stored binary32 rows: error relative to |q||P(x)|.
    long double stored = 0.0L, qn = 0.0L;
    for (std::size_t j = 0; j < p.size(); ++j) {
      stored += static_cast<long double>(qa.values[j]) * am.values.row(i)[j];
      qn += static_cast<long double>(qa.values[j]) * qa.values[j];
    }
    worst_stored = std::max(worst_stored, std::abs(static_cast<double>(stored) - rhs) /
                                              std::sqrt(static_cast<double>(qn * p2)));
  }
  const double secs = timer.seconds();
  Outcome o;
  o.pass = worst_rel <= kC1RelTol && worst_norm <= bound && worst_stored <= 1e-6 &&
           secs < kC1Seconds;
  o.detail = "max rel err " + fmt("%.2e", worst_rel) + " (<= 1e-6), max |P(x)|^2-3/4 " +
             fmt("%.5f", worst_norm) + " (<= " + fmt("%.5f", bound) + "), binary32 rows " +
             fmt("%.1e", worst_stored) + ", " + fmt("%.3f", secs) + " s";
  return o;
}

// ---------------------------------------------------------------- 2
std::vector<std::uint32_t> sort_all_reference(const std::vector<double>& q,
                                              const hmn::MemoryMatrix& m, std::size_t k) {
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::uint32_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += static_cast<double>(m.row(i)[j]) * q[j];
    all.emplace_back(s, i);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

Outcome criterion2(Env&) {
  Timer timer;
  hmn::Rng rng(202);
  std::size_t checked = 0, mismatches = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 10 + rng.below(503);
    const std::size_t d = 1 + rng.below(32);
    // A quarter of the instances use coarse values so ties occur.
    const bool coarse = inst % 4 == 0;
    std::vector<float> v(n * d);
    for (float& x : v) {
      x = coarse ? static_cast<float>(rng.below(3)) : static_cast<float>(rng.normal());
    }
    const hmn::MemoryMatrix m(n, d, v);
    std::vector<double> q(d);
    for (double& x : q) x = coarse ? static_cast<double>(rng.below(2)) : rng.normal();
    for (std::size_t k : {std::size_t{1}, std::size_t{10}, n}) {
      ++checked;
      if (hmn::k_mips_exact(q, m, k).indices != sort_all_reference(q, m, k)) ++mismatches;
    }
  }
  const double secs = timer.seconds();
  return {mismatches == 0 && secs < kC2Seconds,
          std::to_string(checked - mismatches) + "/" + std::to_string(checked) +
              " index sequences equal, " + fmt("%.3f", secs) + " s"};
}

// ---------------------------------------------------------------- 3
double c3_loss(const std::vector<double>& w, std::size_t d, const std::vector<hmn::Question>& batch,
               const std::vector<std::uint32_t>& support, const hmn::MemoryMatrix& m) {
  double total = 0.0;
  for (const auto& q : batch) {
    std::vector<double> h(d, 0.0);
    for (auto t : q.tokens) {
      for (std::size_t j = 0; j < d; ++j) h[j] += w[t * d + j];
    }
    std::vector<double> s;
    double gold = 0.0;
    for (auto i : support) {
      double v = 0.0;
      for (std::size_t j = 0; j < d; ++j) v += h[j] * static_cast<double>(m.row(i)[j]);
      s.push_back(v);
      if (i == q.gold_fact) gold = v;
    }
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    total += std::log(z) + mx - gold;
  }
  return total / static_cast<double>(batch.size());
}

// Max relative error over all touched weights of 20 seeded instances.
double c3_worst(double h, std::size_t* entries) {
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    hmn::Rng rng(hmn::mix_seed(303, inst));
    const std::size_t n = 6, d = 3, vocab = 4;
    std::vector<float> v(n * d);
    for (float& x : v) x = static_cast<float>(rng.normal());
    const hmn::MemoryMatrix m(n, d, v);
    hmn::ReaderModel model = hmn::ReaderModel::random_init(vocab, d, inst, 0.5);
    std::vector<hmn::Question> batch;
    for (int b = 0; b < 3; ++b) {
      hmn::Question q;
      const std::size_t len = 1 + rng.below(4);
      for (std::size_t t = 0; t < len; ++t) q.tokens.push_back(static_cast<std::uint32_t>(rng.below(vocab)));
      q.gold_fact = static_cast<std::uint32_t>(rng.below(n));
      batch.push_back(q);
    }
    hmn::CandidateSet c;
    c.indices.resize(n);
    std::iota(c.indices.begin(), c.indices.end(), 0u);
    const hmn::BatchGradient g = hmn::backward(model, batch, c, m);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      auto wp = model.weights, wm = model.weights;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (c3_loss(wp, d, batch, c.indices, m) - c3_loss(wm, d, batch, c.indices, m)) /
                        (2 * h);
      if (fd == 0.0 && g.grad[i] == 0.0) continue;  // token absent from the batch
      const double denom = std::max({std::abs(fd), std::abs(g.grad[i]), 1e-6});
      worst = std::max(worst, std::abs(fd - g.grad[i]) / denom);
      if (entries) ++*entries;
    }
  }
  return worst;
}

Outcome criterion3(Env&) {
  Timer timer;
  std::size_t entries = 0;
  const double worst = c3_worst(kC3Step, &entries);
  const double secs = timer.seconds();
  // Diagnostic only: shrinking h separates O(h^2) truncation from a wrong gradient.
  const double fine = c3_worst(kC3Step / 10, nullptr);
  return {worst <= kC3MaxRelErr && secs < kC3Seconds,
          "max rel err " + fmt("%.2e", worst) + " over " + std::to_string(entries) +
              " entries (<= 1e-6), at h/10 " + fmt("%.2e", fine) + ", " + fmt("%.3f", secs) + " s"};
}

// ------------------------------------------------------- training helpers

// Decorator recording the pool size of every retrieval.
class CountingRetriever final : public hmn::Retriever {
 public:
  explicit CountingRetriever(const hmn::Retriever& inner) : inner_(inner) {}
  hmn::CandidateSet retrieve(std::span<const double> q, std::uint64_t stream) const override {
    hmn::CandidateSet c = inner_.retrieve(q, stream);
    std::lock_guard<std::mutex> lock(mu_);
    total_ += static_cast<double>(c.size());
    ++calls_;
    return c;
  }
  std::string name() const override { return inner_.name(); }
  double mean() const { return calls_ ? total_ / static_cast<double>(calls_) : 0.0; }

 private:
  const hmn::Retriever& inner_;
  mutable std::mutex mu_;
  mutable double total_ = 0.0;
  mutable std::size_t calls_ = 0;
};

struct RunResult {
  hmn::TrainResult train;
  double test_acc = 0.0;
  double mean_train_pool = 0.0;
  double mean_softmax = 0.0;
  double seconds = 0.0;
};

RunResult run_training(const hmn::SyntheticData& data, const hmn::Retriever& train_r,
                       const hmn::Retriever& eval_r, std::size_t k, std::uint64_t seed,
                       std::size_t epochs, std::size_t patience, double lr) {
  Timer timer;
  const auto& ds = data.dataset;
  hmn::ReaderModel init = hmn::ReaderModel::random_init(ds.vocab.size(), data.memory.dim(), seed);
  init.hyper.lr = lr;
  hmn::TrainOptions o;
  o.k = k;
  o.epochs = epochs;
  o.seed = seed;
  o.patience = patience;
  CountingRetriever counted(train_r);
  RunResult r;
  r.train = hmn::train(init, ds.train, ds.valid, data.memory, counted, eval_r, o);
  r.mean_train_pool = counted.mean();
  double s = 0.0;
  for (const auto& e : r.train.log) s += e.avg_softmax_size;
  r.mean_softmax = s / static_cast<double>(r.train.log.size());
  r.test_acc = hmn::evaluate(r.train.best_model, ds.test, data.memory, eval_r, seed).accuracy;
  r.seconds = timer.seconds();
  return r;
}

std::vector<std::uint8_t> model_bytes(const hmn::ReaderModel& m) {
  hmn::io::ByteWriter w;
  hmn::encode_model(m, w);
  return w.release();
}

// ---------------------------------------------------------------- 4
Outcome criterion4(Env& env) {
  const auto& data = env.dataset();
  const std::size_t n = data.memory.rows();
  const hmn::FullRetriever full(n);
  const hmn::ExactRetriever exact(data.memory, n);
  const RunResult a = run_training(data, full, full, n, 7, kC4Epochs, 0, 0.001);
  const RunResult b = run_training(data, exact, exact, n, 7, kC4Epochs, 0, 0.001);
  bool same = a.train.log.size() == b.train.log.size();
  for (std::size_t e = 0; same && e < a.train.log.size(); ++e) {
    same = a.train.log[e].same_metrics(b.train.log[e]);
  }
  const bool model_same = model_bytes(a.train.best_model) == model_bytes(b.train.best_model);
  std::ostringstream os;
  os << kC4Epochs << "-epoch logs " << (same ? "bit-identical" : "DIFFER")
     << ", models " << (model_same ? "byte-identical" : "DIFFER") << ", final loss "
     << fmt("%.12f", a.train.log.back().train_loss) << ", "
     << fmt("%.0f", a.seconds + b.seconds) << " s";
  return {same && model_same, os.str()};
}

// ---------------------------------------------------------------- 5
Outcome criterion5(Env& env) {
  Timer timer;
  const auto& data = env.dataset();
  const std::size_t n = data.memory.rows();
  const hmn::FullRetriever full(n);
  const hmn::ExactRetriever exact10(data.memory, 10);
  const RunResult f = run_training(data, full, full, n, 5, kTrendMaxEpochs, 3, kTrendLr);
  const RunResult x = run_training(data, exact10, exact10, 10, 5, kTrendMaxEpochs, 3, kTrendLr);
  double max_size = 0.0;
  for (const auto& e : x.train.log) max_size = std::max(max_size, e.avg_softmax_size);
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "full " << fmt("%.1f", 100 * f.test_acc) << "% (" << f.train.log.size()
     << " ep), exact-10 " << fmt("%.1f", 100 * x.test_acc) << "% (" << x.train.log.size()
     << " ep), softmax size " << fmt("%.0f", x.mean_softmax) << " (max "
     << fmt("%.0f", max_size) << ", < " << fmt("%.0f", kC5SizeFraction * n) << "), "
     << fmt("%.0f", secs) << " s";
  const bool pass = x.test_acc >= f.test_acc - kC5AccSlack &&
                    max_size < kC5SizeFraction * static_cast<double>(n) && secs < kC5Seconds;
  return {pass, os.str()};
}

// ---------------------------------------------------------------- 6
Outcome criterion6(Env& env) {
  Timer timer;
  const auto& data = env.dataset();
  const std::size_t n = data.memory.rows();
  const std::size_t budget = n / 5;
  const hmn::McssConfig cfg;
  const hmn::AugmentedMemory am = hmn::augment_memory(data.memory, cfg);

  hmn::ClusterBuildOptions co;
  co.n_clusters = kClusters;
  co.seed = 11;
  const hmn::ClusterIndex ci = hmn::build_cluster_index(am, co);
  hmn::RetrievalStrategy st;
  st.top_clusters = hmn::top_clusters_for_budget(ci, budget);
  const hmn::ClusterRetriever cr(ci, data.memory.dim(), st);

  hmn::WtaBuildOptions wo;
  wo.seed = 11;
  const hmn::WtaIndex wi = hmn::build_wta_index(am, wo);
  const hmn::WtaRetriever wr(wi, data.memory.dim(), budget);

  const hmn::PcaTreeIndex ti = hmn::build_pca_tree(am, budget, 11);
  const hmn::PcaTreeRetriever tr(ti, data.memory.dim());

  const auto rc = hmn::bench_retriever(cr, data.memory, data.queries, 10);
  const auto rw = hmn::bench_retriever(wr, data.memory, data.queries, 10);
  const auto rt = hmn::bench_retriever(tr, data.memory, data.queries, 10);
  auto in_budget = [&](double c) {
    return std::abs(c - static_cast<double>(budget)) <= kC6BudgetSlack * static_cast<double>(budget);
  };
  const bool budgets = in_budget(rc.mean_candidates) && in_budget(rw.mean_candidates) &&
                       in_budget(rt.mean_candidates);
  const double g1 = rc.recall_at_k - rw.recall_at_k;
  const double g2 = rw.recall_at_k - rt.recall_at_k;
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "recall@10 cluster " << fmt("%.3f", rc.recall_at_k) << " / wta "
     << fmt("%.3f", rw.recall_at_k) << " / pca-tree " << fmt("%.3f", rt.recall_at_k)
     << ", gaps " << fmt("%+.1f", 100 * g1) << "pp " << fmt("%+.1f", 100 * g2)
     << "pp (>= 3), candidates " << fmt("%.0f", rc.mean_candidates) << "/"
     << fmt("%.0f", rw.mean_candidates) << "/" << fmt("%.0f", rt.mean_candidates) << ", "
     << data.queries.rows() << " queries, " << fmt("%.1f", secs) << " s";
  return {budgets && g1 >= kC6MinGap && g2 >= kC6MinGap && data.queries.rows() == 1000 &&
              secs < kC6Seconds,
          os.str()};
}

// ---------------------------------------------------------------- 7
Outcome criterion7(Env& env) {
  Timer timer;
  const auto& data = env.dataset();
  const std::size_t n = data.memory.rows();
  const std::size_t d = data.memory.dim();
  const hmn::AugmentedMemory am = hmn::augment_memory(data.memory, {});
  hmn::ClusterBuildOptions co;
  co.n_clusters = kClusters;
  co.seed = 11;
  const hmn::ClusterIndex ci = hmn::build_cluster_index(am, co);
  const std::size_t t_all = hmn::top_clusters_for_budget(ci, n / 5);

  hmn::RetrievalStrategy eval_s;
  eval_s.top_clusters = t_all;
  const hmn::ClusterRetriever eval_r(ci, d, eval_s);

  double acc_top = 0.0, acc_mix = 0.0, pool_top = 0.0, pool_mix = 0.0;
  std::ostringstream per_seed;
  const std::uint64_t seeds[] = {1, 2, 3};
  for (std::uint64_t seed : seeds) {
    hmn::RetrievalStrategy top;
    top.top_clusters = t_all;
    top.rng_seed = seed;
    hmn::RetrievalStrategy mix;
    mix.top_clusters = t_all / 2;
    mix.sampled_clusters = t_all - t_all / 2;
    mix.rng_seed = seed;
    const hmn::ClusterRetriever rt(ci, d, top), rm(ci, d, mix);
    // Candidates are whole retrieved clusters.
    const RunResult a = run_training(data, rt, eval_r, n, seed, kTrendMaxEpochs, 3, kTrendLr);
    const RunResult b = run_training(data, rm, eval_r, n, seed, kTrendMaxEpochs, 3, kTrendLr);
    acc_top += a.test_acc / 3;
    acc_mix += b.test_acc / 3;
    pool_top += a.mean_train_pool / 3;
    pool_mix += b.mean_train_pool / 3;
    per_seed << " s" << seed << ":" << fmt("%.1f", 100 * a.test_acc) << "/"
             << fmt("%.1f", 100 * b.test_acc);
  }
  const bool budget_ok = std::abs(pool_mix - pool_top) <= kC7BudgetSlack * pool_top;
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "top-" << t_all << " " << fmt("%.2f", 100 * acc_top) << "% vs top-" << t_all / 2
     << "+sample-" << t_all - t_all / 2 << " " << fmt("%.2f", 100 * acc_mix)
     << "% (seeds" << per_seed.str() << "), pool/query " << fmt("%.0f", pool_top) << " vs "
     << fmt("%.0f", pool_mix) << ", " << fmt("%.0f", secs) << " s";
  return {acc_mix >= acc_top && budget_ok && secs < kC7Seconds, os.str()};
}

// ---------------------------------------------------------------- 8
int run_cli(const Env& env, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + env.cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() != ".log") {
      out[e.path().filename().string()] = hmn::io::read_file(e.path());
    }
  }
  return out;
}

Outcome criterion8(Env& env) {
  Timer timer;
  std::vector<std::map<std::string, std::vector<std::uint8_t>>> runs;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = env.work / ("c8_run" + std::to_string(rep));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string m = (dir / "memory.hmnm").string();
    const std::vector<std::string> cmds = {
        "gen-data --facts 2000 --dim 16 --vocab 1500 --keywords 2 --noise 2 --seed 5 --out " +
            dir.string(),
        "build-index --type cluster --memory " + m + " --clusters 40 --iters 10 --seed 3 --out " +
            (dir / "c.hmnc").string(),
        "build-index --type wta --memory " + m + " --hashes 8 --perms 3 --prefix 4 --seed 3 --out " +
            (dir / "w.hmnw").string(),
        "build-index --type pca-tree --memory " + m + " --leaf-size 250 --seed 3 --out " +
            (dir / "t.hmnt").string(),
        "train --memory " + m + " --data " + dir.string() +
            " --reader full --epochs 2 --seed 9 --out " + (dir / "full.hmnr").string(),
        "train --memory " + m + " --data " + dir.string() +
            " --reader exact --k 10 --epochs 2 --seed 9 --out " + (dir / "exact.hmnr").string(),
        "train --memory " + m + " --data " + dir.string() + " --reader cluster --index " +
            (dir / "c.hmnc").string() +
            " --k 10 --top-clusters 4 --sample-clusters 4 --rand-blocks 1 --block-count 8"
            " --epochs 2 --seed 9 --out " + (dir / "cluster.hmnr").string(),
        "train --memory " + m + " --data " + dir.string() + " --reader wta --index " +
            (dir / "w.hmnw").string() + " --k 10 --budget 400 --epochs 2 --seed 9 --out " +
            (dir / "wta.hmnr").string(),
        "train --memory " + m + " --data " + dir.string() + " --reader pca-tree --index " +
            (dir / "t.hmnt").string() + " --k 10 --epochs 2 --seed 9 --out " +
            (dir / "tree.hmnr").string(),
    };
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (run_cli(env, cmds[i], dir / ("step" + std::to_string(i) + ".log")) != 0) {
        return {false, "command failed: hmn " + cmds[i]};
      }
    }
    runs.push_back(snapshot(dir));
  }
  std::size_t equal = 0;
  std::string first_diff;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it != runs[1].end() && it->second == bytes) {
      ++equal;
    } else if (first_diff.empty()) {
      first_diff = name;
    }
  }
  const bool pass = equal == runs[0].size() && runs[0].size() == runs[1].size() && runs[0].size() >= 13;
  std::ostringstream os;
  os << equal << "/" << runs[0].size() << " output files byte-identical across repeated runs";
  if (!first_diff.empty()) os << " (first difference: " << first_diff << ")";
  os << ", " << fmt("%.0f", timer.seconds()) << " s";
  return {pass, os.str()};
}

// ---------------------------------------------------------------- 9
Outcome criterion9(Env& env) {
  const auto& data = env.dataset();
  const fs::path dir = env.work / "c9";
  fs::remove_all(dir);
  hmn::write_synthetic(data, dir);
  const std::string m = (dir / "memory.hmnm").string();
  const std::size_t n = data.memory.rows();
  if (run_cli(env, "build-index --type cluster --memory " + m + " --clusters " +
                       std::to_string(kClusters) + " --seed 11 --out " + (dir / "c.hmnc").string(),
              dir / "build.log") != 0) {
    return {false, "build-index failed"};
  }
  const fs::path report = dir / "bench.json";
  if (run_cli(env, "bench --index " + (dir / "c.hmnc").string() + " --memory " + m +
                       " --queries " + (dir / "queries.hmnm").string() + " --k 10 --budget " +
                       std::to_string(n / 5),
              report) != 0) {
    return {false, "bench failed"};
  }
  std::ifstream in(report);
  const json r = json::parse(in);
  const double speedup = r.at("speedup").get<double>();
  const double mean = r.at("mean_candidates").get<double>();
  const bool accounting = speedup == static_cast<double>(n) / mean;
  const bool pass = accounting && std::abs(speedup - kC9Target) <= kC9Slack;
  std::ostringstream os;
  os << "speedup " << fmt("%.3f", speedup) << " (5.0 +/- 0.5), mean candidates "
     << fmt("%.1f", mean) << ", N/mean " << (accounting ? "matches" : "MISMATCH")
     << ", recall@10 " << fmt("%.3f", r.at("recall_at_k").get<double>());
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  Env env;
  env.work = fs::temp_directory_path() / "hmn_acceptance";
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      env.cli = argv[++i];
    } else if (a == "--work" && i + 1 < argc) {
      env.work = argv[++i];
    } else {
      selected.insert(std::atoi(a.c_str()));
    }
  }
  if (env.cli.empty()) {
    std::fprintf(stderr, "acceptance: --cli PATH is required\n");
    return 2;
  }
  fs::create_directories(env.work);

  const std::vector<std::pair<std::string, std::function<Outcome(Env&)>>> all = {
      {"MCSS reduction exactness", criterion1},
      {"exact K-MIPS vs full-sort oracle", criterion2},
      {"analytic gradient vs finite differences", criterion3},
      {"exact k=N reproduces full softmax", criterion4},
      {"exact 10-MIPS >= full softmax - 1pp", criterion5},
      {"backend ordering at budget N/5", criterion6},
      {"Top-K+Sample-K >= Top-K", criterion7},
      {"CLI determinism", criterion8},
      {"budget and speedup accounting", criterion9},
  };
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = all[i].second(env);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d [%s] %s: %s\n", id, o.pass ? "PASS" : "FAIL",
                all[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  fs::remove_all(env.work);
  return failures == 0 ? 0 : 1;
}
