#include "matan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "matan/error.hpp"
#include "matan/format.hpp"

namespace matan {
namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw InputError("train_fraction must lie strictly between 0 and 1");
}

std::size_t rounded_share(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

EmbeddingTable glove_for(const Corpus& corpus, const ExperimentConfig& cfg,
                         std::optional<std::span<const NodeId>> docs) {
  return train_glove(count_cooccurrences(corpus, cfg.window, docs), cfg.glove);
}

double auc_for(const Corpus& corpus, const EmbeddingTable& emb, const ModelParams& params,
               const ExperimentConfig& cfg, const std::vector<Edge>& pos,
               const std::vector<Edge>& neg) {
  std::vector<Edge> pairs = pos;
  pairs.insert(pairs.end(), neg.begin(), neg.end());
  ScoredSet set;
  set.scores = score_pairs(corpus, emb, params, cfg.train.pooling, pairs, cfg.train.threads);
  set.labels.assign(pos.size(), 1);
  set.labels.resize(pairs.size(), 0);
  return roc_auc(set);
}

}  // namespace

EdgeSplit split_edges(const Graph& graph, double train_fraction, Rng& rng) {
  check_fraction(train_fraction);
  const auto& edges = graph.edges();
  if (edges.size() < 2) throw InputError("an edge split needs at least two edges");
  const std::size_t n_train = rounded_share(train_fraction, edges.size());
  if (n_train == 0 || n_train >= edges.size()) {
    throw InputError("train_fraction " + std::to_string(train_fraction) + " on " +
                     std::to_string(edges.size()) + " edges leaves one side empty");
  }
  std::vector<Edge> shuffled = edges;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EdgeSplit split;
  split.test_edges.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  shuffled.resize(n_train);
  split.train_graph = Graph::from_edges(graph.n_nodes(), shuffled, graph.nodes());
  return split;
}

NodeSplit split_nodes(const Graph& graph, double train_fraction, Rng& rng) {
  check_fraction(train_fraction);
  std::vector<NodeId> nodes = graph.nodes();
  if (nodes.size() < 2) throw InputError("a node split needs at least two nodes");
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(rounded_share(train_fraction, nodes.size()));
  return split_nodes_by(graph, nodes);
}

NodeSplit split_nodes_by(const Graph& graph, std::span<const NodeId> train_nodes) {
  std::vector<char> in_train(graph.n_nodes(), 0);
  for (NodeId u : train_nodes) {
    if (!graph.contains(u)) throw InputError("split_nodes_by: node is not a graph member");
    in_train[u] = 1;
  }
  std::vector<NodeId> train_side, test_side;
  for (NodeId u : graph.nodes()) (in_train[u] ? train_side : test_side).push_back(u);

  std::vector<Edge> train_edges, test_edges;
  for (const auto& e : graph.edges()) {
    if (in_train[e.first] && in_train[e.second]) {
      train_edges.push_back(e);
    } else if (!in_train[e.first] && !in_train[e.second]) {
      test_edges.push_back(e);
    }
  }
  if (train_edges.empty() || test_edges.empty()) {
    throw InputError(std::string("node split leaves the ") +
                     (train_edges.empty() ? "training" : "test") + " subgraph without edges (" +
                     std::to_string(train_side.size()) + " of " +
                     std::to_string(graph.nodes().size()) + " nodes in training)");
  }
  return {Graph::from_edges(graph.n_nodes(), train_edges, std::move(train_side)),
          Graph::from_edges(graph.n_nodes(), test_edges, std::move(test_side))};
}

std::vector<Edge> sample_non_edges(const Graph& graph, std::size_t n,
                                   std::optional<std::span<const NodeId>> restrict_to, Rng& rng) {
  std::vector<NodeId> pool =
      restrict_to ? std::vector<NodeId>(restrict_to->begin(), restrict_to->end()) : graph.nodes();
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  for (NodeId u : pool) {
    if (u >= graph.n_nodes()) throw InputError("sample_non_edges: node id out of range");
  }
  const std::size_t m = pool.size();
  std::vector<char> in_pool(graph.n_nodes(), 0);
  for (NodeId u : pool) in_pool[u] = 1;
  std::size_t inside_edges = 0;
  for (const auto& [a, b] : graph.edges()) inside_edges += (in_pool[a] && in_pool[b]);
  const std::size_t all_pairs = m < 2 ? 0 : m * (m - 1) / 2;
  const std::size_t available = all_pairs - inside_edges;
  if (n > available) {
    throw InputError("requested " + std::to_string(n) + " non-edges but only " +
                     std::to_string(available) + " exist among " + std::to_string(m) + " nodes");
  }
  std::vector<Edge> out;
  out.reserve(n);
  if (n == 0) return out;

  if (n * 2 > available) {
    // Dense request: enumerate and take a uniform subset.
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (!graph.has_edge(pool[i], pool[j])) out.emplace_back(pool[i], pool[j]);
      }
    }
    std::shuffle(out.begin(), out.end(), rng);
    out.resize(n);
    return out;
  }

  std::unordered_set<std::uint64_t> chosen;
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  while (out.size() < n) {
    NodeId a = pool[pick(rng)], b = pool[pick(rng)];
    if (a == b || graph.has_edge(a, b)) continue;
    if (a > b) std::swap(a, b);
    if (!chosen.insert(pair_key(a, b)).second) continue;
    out.emplace_back(a, b);
  }
  return out;
}

double roc_auc(const ScoredSet& set) {
  const std::size_t n = set.scores.size();
  if (set.labels.size() != n) throw InputError("roc_auc: scores and labels differ in length");
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(set.scores[i])) throw NumericError("roc_auc: NaN score");
    if (set.labels[i] > 1) throw InputError("roc_auc: labels must be 0 or 1");
    n_pos += set.labels[i];
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InputError("roc_auc needs both positive and negative labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });
  // Twice the Mann-Whitney U: each positive scores 2 per lower negative and
  // 1 per tied negative.
  std::uint64_t u2 = 0, neg_below = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::uint64_t pos_g = 0, neg_g = 0;
    while (j < n && set.scores[order[j]] == set.scores[order[i]]) {
      (set.labels[order[j]] ? pos_g : neg_g) += 1;
      ++j;
    }
    u2 += 2 * pos_g * neg_below + pos_g * neg_g;
    neg_below += neg_g;
    i = j;
  }
  return static_cast<double>(u2) / static_cast<double>(2 * n_pos * n_neg);
}

std::vector<double> score_pairs(const Corpus& corpus, const EmbeddingTable& embeddings,
                                const ModelParams& params, Pooling pooling,
                                std::span<const Edge> pairs, unsigned threads) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].first < pairs[b].first; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pairs[order[j]].first == pairs[order[i]].first) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  std::vector<double> scores(pairs.size());
  auto run = [&](std::size_t g_begin, std::size_t g_end) {
    for (std::size_t g = g_begin; g < g_end; ++g) {
      const auto [b, e] = groups[g];
      const DocMatrix du = DocMatrix::lookup(embeddings, corpus.docs.at(pairs[order[b]].first));
      const ProjectedDoc pu = project(du, params);
      for (std::size_t i = b; i < e; ++i) {
        const DocMatrix dv = DocMatrix::lookup(embeddings, corpus.docs.at(pairs[order[i]].second));
        scores[order[i]] = pair_score(pu, project(dv, params), pooling);
      }
    }
  };
  if (embeddings.dim != params.dim) throw InputError("embedding and model dimensions differ");
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(groups.size())));
  if (threads <= 1) {
    run(0, groups.size());
    return scores;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = groups.size() * w / threads, e = groups.size() * (w + 1) / threads;
      workers.emplace_back([&, w, b, e] {
        try {
          run(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return scores;
}

EvalReport evaluate_edges_hidden(const Corpus& corpus, const Graph& graph, double train_fraction,
                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  EdgeSplit split = split_edges(graph, train_fraction, rng);
  const EmbeddingTable emb = cfg.embeddings ? *cfg.embeddings : glove_for(corpus, cfg, std::nullopt);

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainResult trained = train(corpus, split.train_graph, emb, tc);

  const auto negatives = sample_non_edges(graph, split.test_edges.size(), std::nullopt, rng);
  EvalReport report;
  report.auc = auc_for(corpus, emb, trained.params, cfg, split.test_edges, negatives);
  report.train_edges = split.train_graph.edges().size();
  report.test_positives = split.test_edges.size();
  report.trace = std::move(trained.trace);
  return report;
}

EvalReport evaluate_nodes_hidden(const Corpus& corpus, const Graph& graph, double train_fraction,
                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  NodeSplit split = split_nodes(graph, train_fraction, rng);
  EmbeddingTable emb;
  if (cfg.embeddings) {
    emb = *cfg.embeddings;
  } else if (cfg.full_corpus_embeddings) {
    emb = glove_for(corpus, cfg, std::nullopt);
  } else {
    emb = glove_for(corpus, cfg, std::span<const NodeId>(split.train_graph.nodes()));
  }

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainResult trained = train(corpus, split.train_graph, emb, tc);

  const auto& test_nodes = split.test_graph.nodes();
  const auto negatives = sample_non_edges(graph, split.test_graph.edges().size(),
                                          std::span<const NodeId>(test_nodes), rng);
  EvalReport report;
  report.auc = auc_for(corpus, emb, trained.params, cfg, split.test_graph.edges(), negatives);
  report.train_edges = split.train_graph.edges().size();
  report.test_positives = split.test_graph.edges().size();
  report.trace = std::move(trained.trace);
  return report;
}

std::string task_name(Task task) {
  return task == Task::kEdgesHidden ? "edges-hidden" : "nodes-hidden";
}

std::vector<ResultRow> run_experiment(Task task, const Corpus& corpus, const Graph& graph,
                                      std::span<const double> fractions,
                                      std::span<const std::uint64_t> seeds,
                                      const ExperimentConfig& cfg) {
  ExperimentConfig shared = cfg;
  const bool split_independent =
      task == Task::kEdgesHidden || cfg.full_corpus_embeddings;
  if (!shared.embeddings && split_independent) {
    shared.embeddings = glove_for(corpus, cfg, std::nullopt);
  }
  std::vector<ResultRow> rows;
  for (double f : fractions) {
    for (std::uint64_t s : seeds) {
      const EvalReport r = task == Task::kEdgesHidden
                               ? evaluate_edges_hidden(corpus, graph, f, shared, s)
                               : evaluate_nodes_hidden(corpus, graph, f, shared, s);
      rows.push_back({task, f, s, r.auc});
    }
  }
  return rows;
}

std::vector<FractionSummary> summarize(std::span<const ResultRow> rows) {
  std::map<std::pair<int, double>, std::vector<double>> cells;
  for (const auto& r : rows) cells[{static_cast<int>(r.task), r.train_fraction}].push_back(r.auc);
  std::vector<FractionSummary> out;
  for (const auto& [key, aucs] : cells) {
    const double n = static_cast<double>(aucs.size());
    const double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : aucs) ss += (a - mean) * (a - mean);
    out.push_back({static_cast<Task>(key.first), key.second, mean,
                   aucs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0, aucs.size()});
  }
  return out;
}

void write_results_tsv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "task\ttrain_fraction\tseed\tauc\n";
  for (const auto& r : rows) {
    out << task_name(r.task) << '\t' << format_double(r.train_fraction) << '\t' << r.seed << '\t'
        << format_double(r.auc) << '\n';
  }
  for (const auto& s : summarize(rows)) {
    out << task_name(s.task) << '\t' << format_double(s.train_fraction) << "\tmean\t"
        << format_double(s.mean) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

void write_means_tsv(std::span<const FractionSummary> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "task\ttrain_fraction\tmean_auc\tstd_auc\tn_seeds\n";
  for (const auto& s : rows) {
    out << task_name(s.task) << '\t' << format_double(s.train_fraction) << '\t' << format_double(s.mean) << '\t'
        << format_double(s.stddev)
        << '\t' << s.n << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace matan
