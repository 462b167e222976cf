#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matan/attention.hpp"
#include "matan/corpus.hpp"
#include "matan/glove.hpp"
#include "matan/graph.hpp"
#include "matan/trainer.hpp"

namespace matan {

struct EdgeSplit {
  Graph train_graph;  // all original nodes, training edges only
  std::vector<Edge> test_edges;
};

struct NodeSplit {
  Graph train_graph;  // induced on the training nodes
  Graph test_graph;   // induced on the remaining nodes
};

struct ScoredSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;  // 1 = positive
};

/// round(train_fraction * |E|) edges go to training, chosen uniformly.
/// Throws InputError if either side would be empty.
EdgeSplit split_edges(const Graph& graph, double train_fraction, Rng& rng);

/// round(train_fraction * |V|) nodes go to training, chosen uniformly; edges
/// crossing the partition are dropped. Throws InputError if either induced
/// graph has no edges.
NodeSplit split_nodes(const Graph& graph, double train_fraction, Rng& rng);

/// Induced subgraphs on `train_nodes` and on the remaining graph members.
/// Same error rule as split_nodes.
NodeSplit split_nodes_by(const Graph& graph, std::span<const NodeId> train_nodes);

/// n distinct unordered non-adjacent pairs (no self-pairs) drawn uniformly
/// among the nodes of `restrict_to` (default: all graph members). `graph`
/// must be the full original graph so that hidden edges are never returned.
std::vector<Edge> sample_non_edges(const Graph& graph, std::size_t n,
                                   std::optional<std::span<const NodeId>> restrict_to, Rng& rng);

/// Mann-Whitney AUC: (#concordant + 0.5 #tied) / (#pos * #neg), computed
/// with one sort and mid-ranks. Throws InputError without both classes.
double roc_auc(const ScoredSet& set);

/// Scores every pair; documents are projected once per group of pairs that
/// share a first node. Parallel over groups when threads > 1.
std::vector<double> score_pairs(const Corpus& corpus, const EmbeddingTable& embeddings,
                                const ModelParams& params, Pooling pooling,
                                std::span<const Edge> pairs, unsigned threads = 1);

struct ExperimentConfig {
  std::size_t window = 5;
  GloveConfig glove;
  TrainConfig train;
  /// Train word vectors on every document, including those hidden by a node
  /// split. Off by default.
  bool full_corpus_embeddings = false;
  /// Skip GloVe and use these vectors for every split.
  std::optional<EmbeddingTable> embeddings;
};

struct EvalReport {
  double auc = 0.0;
  std::size_t train_edges = 0;
  std::size_t test_positives = 0;
  TrainTrace trace;
};

/// Hide 1 - train_fraction of the edges, train on the rest, rank hidden
/// edges against as many sampled non-edges. `seed` drives the split, the
/// model initialization and the pair sampler.
EvalReport evaluate_edges_hidden(const Corpus& corpus, const Graph& graph, double train_fraction,
                                 const ExperimentConfig& cfg, std::uint64_t seed);

/// Split nodes, train on the training induced subgraph, rank test-side edges
/// against as many non-edges among test nodes.
EvalReport evaluate_nodes_hidden(const Corpus& corpus, const Graph& graph, double train_fraction,
                                 const ExperimentConfig& cfg, std::uint64_t seed);

enum class Task { kEdgesHidden, kNodesHidden };
std::string task_name(Task task);

struct ResultRow {
  Task task;
  double train_fraction;
  std::uint64_t seed;
  double auc;
};

struct FractionSummary {
  Task task;
  double train_fraction;
  double mean;
  double stddev;  // sample standard deviation, 0 for a single seed
  std::size_t n;
};

/// Runs every (fraction, seed) cell. Word vectors that do not depend on the
/// split are trained once and shared.
std::vector<ResultRow> run_experiment(Task task, const Corpus& corpus, const Graph& graph,
                                      std::span<const double> fractions,
                                      std::span<const std::uint64_t> seeds,
                                      const ExperimentConfig& cfg);

std::vector<FractionSummary> summarize(std::span<const ResultRow> rows);

/// `task train_fraction seed auc` rows followed by one `seed=mean` summary
/// row per fraction.
void write_results_tsv(std::span<const ResultRow> rows, const std::filesystem::path& path);
/// `task train_fraction mean_auc std_auc n_seeds`, one row per fraction.
void write_means_tsv(std::span<const FractionSummary> rows, const std::filesystem::path& path);

}  // namespace matan
