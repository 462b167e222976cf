// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "matan/attention.hpp"
#include "matan/cli.hpp"
#include "matan/evaluation.hpp"
#include "matan/glove.hpp"
#include "support/files.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

namespace {

using namespace matan;
namespace mt = matan::testing;

// Tolerances.
constexpr double kGradRelTol = 1e-3;
constexpr double kFdStep = 1e-5;
constexpr double kRowSumTol = 1e-12;
constexpr double kPermTol = 1e-12;
constexpr double kHullTol = 1e-12;
constexpr double kSymTol = 1e-9;
constexpr double kAnchorTol = 1e-12;
constexpr double kMinGain = 0.2;
constexpr double kNullLo = 0.35;
constexpr double kNullHi = 0.65;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

Verdict gradient_correctness() {
  double worst = 0.0;
  int cases = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (std::size_t k : {1u, 3u}) {
      std::mt19937_64 rng(seed * 31 + k);
      std::uniform_int_distribution<std::size_t> len(3, 6);
      constexpr std::size_t d = 8;
      const ModelParams p = mt::random_params(d, rng, 0.35);
      const Matrix wu = mt::random_matrix(len(rng), d, rng);
      const Matrix wv = mt::random_matrix(len(rng), d, rng);
      std::vector<Matrix> noise;
      for (std::size_t i = 0; i < k; ++i) noise.push_back(mt::random_matrix(len(rng), d, rng));
      const DocMatrix du(wu), dv(wv);
      std::vector<DocMatrix> dz(noise.begin(), noise.end());
      std::vector<DocPair> negs;
      for (const auto& z : dz) negs.push_back({&du, &z});
      const LossAndGrads got = loss_and_grads({&du, &dv}, negs, p);
      const ParamGrads fd = mt::central_differences(
          [&](const ModelParams& q) { return mt::naive_nce_loss(wu, wv, noise, q, true); }, p,
          kFdStep);
      worst = std::max(worst, mt::max_relative_error(got.grads, fd));
      ++cases;
    }
  }
  return {worst < kGradRelTol,
          std::to_string(cases) + " instances, max relative error " + num(worst) + " (< " +
              num(kGradRelTol) + ")"};
}

Verdict attention_properties() {
  constexpr int kInstances = 200;
  double row = 0.0, perm = 0.0, hull = 0.0, sym = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    std::mt19937_64 rng(7000 + t);
    std::uniform_int_distribution<std::size_t> len(1, 8), dim(1, 10);
    const std::size_t d = dim(rng);
    const ModelParams p = mt::random_params(d, rng, 0.8);
    const Matrix wu = mt::random_matrix(len(rng), d, rng), wv = mt::random_matrix(len(rng), d, rng);
    const DocMatrix du(wu), dv(wv);

    const Matrix a = attention_weights(du, dv, p);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const auto r = a.row(i);
      row = std::max(row, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }

    const Matrix out = sdpa(du, dv, p);
    const Matrix values = matmul(wv, p.pv);
    for (std::size_t c = 0; c < d; ++c) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t j = 0; j < values.rows(); ++j) {
        lo = std::min(lo, values(j, c));
        hi = std::max(hi, values(j, c));
      }
      for (std::size_t i = 0; i < out.rows(); ++i) {
        hull = std::max({hull, lo - out(i, c), out(i, c) - hi});
      }
    }

    // Reverse the rows of both documents.
    Matrix ru(wu.rows(), d), rv(wv.rows(), d);
    for (std::size_t i = 0; i < wu.rows(); ++i) std::copy(wu.row(i).begin(), wu.row(i).end(), ru.row(wu.rows() - 1 - i).begin());
    for (std::size_t i = 0; i < wv.rows(); ++i) std::copy(wv.row(i).begin(), wv.row(i).end(), rv.row(wv.rows() - 1 - i).begin());
    const auto base = mutual_embed(du, dv, p).values;
    const auto pu = mutual_embed(DocMatrix(ru), dv, p).values;
    const auto pv = mutual_embed(du, DocMatrix(rv), p).values;
    for (std::size_t c = 0; c < d; ++c) {
      perm = std::max({perm, std::abs(base[c] - pu[c]), std::abs(base[c] - pv[c])});
    }
    sym = std::max(sym, std::abs(pair_score(du, dv, p) - pair_score(dv, du, p)));
  }
  const bool ok = row <= kRowSumTol && perm <= kPermTol && hull <= kHullTol && sym <= kSymTol;
  return {ok, std::to_string(kInstances) + " instances: row-sum " + num(row) + ", permutation " +
                  num(perm) + ", hull excess " + num(hull) + ", symmetry " + num(sym)};
}

Verdict auc_oracle() {
  int mismatches = 0, asym = 0;
  for (int t = 0; t < 100; ++t) {
    std::mt19937_64 rng(400 + t);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    ScoredSet s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(rng() % 2 ? static_cast<double>(rng() % 8) : std::normal_distribution<>(0, 3)(rng));
      s.labels.push_back(static_cast<std::uint8_t>(i == 0 ? 1 : i == 1 ? 0 : rng() % 2));
    }
    const double auc = roc_auc(s);
    if (auc != mt::pairwise_auc(s.scores, s.labels)) ++mismatches;
    for (double& x : s.scores) x = -x;
    if (auc + roc_auc(s) != 1.0) ++asym;
  }
  return {mismatches == 0 && asym == 0, "100 instances with ties: " + std::to_string(mismatches) +
                                            " oracle mismatches, " + std::to_string(asym) +
                                            " symmetry violations"};
}

Verdict loss_anchors() {
  std::mt19937_64 rng(5);
  ModelParams p = mt::random_params(6, rng, 1.0);
  p.pv.fill(0.0);
  const DocMatrix a(mt::random_matrix(3, 6, rng)), b(mt::random_matrix(4, 6, rng)),
      z1(mt::random_matrix(2, 6, rng)), z2(mt::random_matrix(5, 6, rng));
  const std::vector<DocPair> one{{&a, &z1}}, two{{&a, &z1}, {&a, &z2}};
  const double e1 = std::abs(loss_and_grads({&a, &b}, one, p).loss - 2.0 * std::log(2.0));
  const double e2 = std::abs(loss_and_grads({&a, &b}, two, p).loss - 3.0 * std::log(2.0));
  return {e1 <= kAnchorTol && e2 <= kAnchorTol,
          "k=1 error " + num(e1) + ", k=2 error " + num(e2)};
}

Verdict synthetic_learning() {
  const auto net = mt::make_planted({});
  ExperimentConfig cfg;
  cfg.glove.dim = 32;
  cfg.glove.epochs = 50;
  cfg.train.lr = 0.01;
  cfg.train.n_pairs = 20000;
  cfg.embeddings = train_glove(count_cooccurrences(net.corpus, cfg.window), cfg.glove);
  ExperimentConfig untrained = cfg;
  untrained.train.n_pairs = 0;

  double sum_trained = 0.0, sum_null = 0.0;
  bool null_ok = true;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double t = evaluate_edges_hidden(net.corpus, net.graph, 0.5, cfg, seed).auc;
    const double u = evaluate_edges_hidden(net.corpus, net.graph, 0.5, untrained, seed).auc;
    null_ok = null_ok && u >= kNullLo && u <= kNullHi;
    sum_trained += t;
    sum_null += u;
    per_seed += " " + num(u) + "->" + num(t);
  }
  const double gain = (sum_trained - sum_null) / 5.0;
  return {gain >= kMinGain && null_ok,
          "mean gain " + num(gain) + " (>= " + num(kMinGain) + "), untrained->trained:" + per_seed};
}

Verdict determinism() {
  mt::TempDir dir;
  mt::write_planted(mt::make_planted({}), dir.path());
  const std::vector<std::string> names = {"model.txt", "loss.tsv", "embeddings.txt",
                                          "results.tsv", "means.tsv"};
  std::vector<std::string> outputs[2];
  for (int run = 0; run < 2; ++run) {
    const std::string out = (dir.path() / ("run" + std::to_string(run))).string();
    const std::vector<std::string> common = {
        "--documents", (dir.path() / "docs.tsv").string(), "--edges",
        (dir.path() / "edges.tsv").string(), "--out", out, "--dim", "16", "--glove-epochs", "10",
        "--min-count", "1", "--n-pairs", "2000", "--threads", "1", "--seeds", "1,2"};
    std::ostringstream sink;
    for (const char* sub : {"train", "eval-edges"}) {
      std::vector<std::string> args{sub};
      args.insert(args.end(), common.begin(), common.end());
      if (cli::run(args, sink, sink) != 0) return {false, std::string(sub) + " failed: " + sink.str()};
    }
    for (const auto& n : names) outputs[run].push_back(mt::slurp(std::filesystem::path(out) / n));
  }
  std::string differing;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (outputs[0][i] != outputs[1][i] || outputs[0][i].empty()) differing += " " + names[i];
  }
  return {differing.empty(),
          differing.empty() ? "model, loss, embeddings and result TSVs byte-identical"
                            : "differs:" + differing};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness vs central differences", gradient_correctness},
      {2, "attention kernel properties", attention_properties},
      {3, "AUC oracle equivalence and symmetry", auc_oracle},
      {4, "loss anchors at zero score", loss_anchors},
      {5, "synthetic learning check", synthetic_learning},
      {9, "end-to-end determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
