#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "matan/attention.hpp"
#include "matan/corpus.hpp"
#include "matan/glove.hpp"
#include "matan/graph.hpp"

namespace matan {

enum class PositiveSampling {
  kUniformEdges,  // every undirected edge equally likely
  kRowWeighted,   // source uniform over non-isolated nodes, target ~ M[source, .]
};

struct TrainConfig {
  std::size_t k = 1;            // negatives per positive
  std::size_t n_pairs = 100000; // positives drawn in total
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Pooling pooling = Pooling::kMean;
  PositiveSampling sampling = PositiveSampling::kUniformEdges;
  unsigned threads = 1;

  void validate() const;
};

struct AdamState {
  ParamGrads m, v;
  std::size_t t = 0;

  static AdamState fresh(std::size_t dim);
};

struct TrainTrace {
  std::vector<double> losses;  // mean loss per positive, one entry per batch
  std::size_t samples_seen = 0;
};

using Rng = std::mt19937_64;

/// Uniform undirected edge with a random orientation. Throws InputError on
/// an edgeless graph.
std::pair<NodeId, NodeId> sample_positive(const Graph& graph, Rng& rng,
                                          PositiveSampling mode = PositiveSampling::kUniformEdges);

/// k i.i.d. uniform draws from [0, n_nodes). Collisions with the positive
/// pair or its neighbours are kept.
std::vector<NodeId> sample_negatives(std::size_t k, std::size_t n_nodes, Rng& rng);

/// Bias-corrected Adam update in place. Throws NumericError if `grads` is
/// not finite (params and state are left untouched).
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainResult {
  ModelParams params;
  TrainTrace trace;
  AdamState adam;
};

/// Trains P_Q, P_K, P_V with frozen word vectors, starting from
/// init_params(embeddings.dim, cfg.seed). Negatives are drawn
/// uniformly over graph.nodes(), so an induced subgraph never sees outside
/// documents. Deterministic for a fixed config when threads == 1.
TrainResult train(const Corpus& corpus, const Graph& graph, const EmbeddingTable& embeddings,
                  const TrainConfig& cfg);

/// `batch_index\tmean_loss` lines.
void save_trace(const TrainTrace& trace, const std::filesystem::path& path);

}  // namespace matan
