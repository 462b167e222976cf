#include "matan/trainer.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "matan/error.hpp"
#include "matan/format.hpp"

namespace matan {
namespace {

// The sampler gets its own stream so that it does not depend on the model size.
constexpr std::uint64_t kSampleStream = 0xd1b54a32d192ed03ULL;

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, double lr, double beta1,
                 double beta2, double eps, double bc1, double bc2) {
  double* p = param.data();
  const double* g = grad.data();
  double* mm = m.data();
  double* vv = v.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    mm[i] = beta1 * mm[i] + (1.0 - beta1) * g[i];
    vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
    const double m_hat = mm[i] / bc1;
    const double v_hat = vv[i] / bc2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (k < 1) throw InputError("k (negatives per positive) must be at least 1");
  if (batch_size < 1) throw InputError("batch_size must be at least 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InputError("Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw InputError("Adam eps must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("learning rate must be finite and >= 0");
}

AdamState AdamState::fresh(std::size_t dim) {
  return {ParamGrads::zeros(dim), ParamGrads::zeros(dim), 0};
}

std::pair<NodeId, NodeId> sample_positive(const Graph& graph, Rng& rng, PositiveSampling mode) {
  const auto& edges = graph.edges();
  if (edges.empty()) throw InputError("cannot sample a positive pair from an edgeless graph");
  if (mode == PositiveSampling::kRowWeighted) {
    // Rejection over member nodes until a non-isolated one comes up.
    const auto& nodes = graph.nodes();
    std::uniform_int_distribution<std::size_t> pick_node(0, nodes.size() - 1);
    NodeId u;
    do {
      u = nodes[pick_node(rng)];
    } while (graph.degree(u) == 0);
    const auto cols = graph.norm_adjacency().row_cols(u);
    const auto vals = graph.norm_adjacency().row_vals(u);
    std::discrete_distribution<std::size_t> pick_nb(vals.begin(), vals.end());
    return {u, cols[pick_nb(rng)]};
  }
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  auto [a, b] = edges[pick(rng)];
  std::bernoulli_distribution flip(0.5);
  if (flip(rng)) std::swap(a, b);
  return {a, b};
}

std::vector<NodeId> sample_negatives(std::size_t k, std::size_t n_nodes, Rng& rng) {
  if (n_nodes == 0) throw InputError("cannot sample negatives from an empty node set");
  std::uniform_int_distribution<std::size_t> pick(0, n_nodes - 1);
  std::vector<NodeId> out(k);
  for (auto& z : out) z = static_cast<NodeId>(pick(rng));
  return out;
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (!grads.gq.same_shape(params.pq) || !grads.gk.same_shape(params.pk) ||
      !grads.gv.same_shape(params.pv) || !state.m.gq.same_shape(params.pq)) {
    throw InputError("adam_step: shape mismatch between parameters, gradients and state");
  }
  if (!grads.all_finite()) {
    throw NumericError("adam_step: non-finite gradient at step " + std::to_string(state.t + 1));
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  adam_update(params.pq, grads.gq, state.m.gq, state.v.gq, lr, beta1, beta2, eps, bc1, bc2);
  adam_update(params.pk, grads.gk, state.m.gk, state.v.gk, lr, beta1, beta2, eps, bc1, bc2);
  adam_update(params.pv, grads.gv, state.m.gv, state.v.gv, lr, beta1, beta2, eps, bc1, bc2);
}

TrainResult train(const Corpus& corpus, const Graph& graph, const EmbeddingTable& embeddings,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (graph.n_nodes() != corpus.n_nodes()) {
    throw InputError("graph and corpus disagree on the number of nodes");
  }
  if (embeddings.vocab_size() != corpus.vocab.size()) {
    throw InputError("embedding table does not cover the corpus vocabulary");
  }
  if (embeddings.dim == 0) throw InputError("embedding dimension must be at least 1");
  if (graph.edges().empty()) throw InputError("training graph has no edges");

  TrainResult result{init_params(embeddings.dim, cfg.seed), {}, AdamState::fresh(embeddings.dim)};
  AdamState& adam = result.adam;
  Rng rng(cfg.seed ^ kSampleStream);
  const auto& members = graph.nodes();

  std::size_t remaining = cfg.n_pairs;
  ParamGrads grads = ParamGrads::zeros(embeddings.dim);
  while (remaining > 0) {
    const std::size_t b = std::min(cfg.batch_size, remaining);
    remaining -= b;

    // Distinct nodes of the batch, in first-draw order.
    std::unordered_map<NodeId, std::size_t> slot;
    std::vector<DocMatrix> docs;
    docs.reserve(b * (cfg.k + 2));
    auto doc_slot = [&](NodeId n) {
      auto [it, fresh] = slot.emplace(n, docs.size());
      if (fresh) docs.push_back(DocMatrix::lookup(embeddings, corpus.docs.at(n)));
      return it->second;
    };
    struct Draw {
      std::size_t u, v;
      std::vector<std::size_t> z;
    };
    std::vector<Draw> draws;
    draws.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
      const auto [u, v] = sample_positive(graph, rng, cfg.sampling);
      Draw d{doc_slot(u), doc_slot(v), {}};
      for (NodeId z : sample_negatives(cfg.k, members.size(), rng)) {
        d.z.push_back(doc_slot(members[z]));
      }
      draws.push_back(std::move(d));
    }

    PairBatch batch;
    for (const auto& d : docs) batch.add_doc(d);
    for (const auto& d : draws) {
      batch.add_term(d.u, d.v, 1.0);
      for (std::size_t z : d.z) batch.add_term(d.u, z, -1.0);
    }

    for (Matrix* m : {&grads.gq, &grads.gk, &grads.gv}) m->fill(0.0);
    const double inv_b = 1.0 / static_cast<double>(b);
    const double loss = batch.loss_and_grads(result.params, cfg.pooling, grads, inv_b, cfg.threads);
    if (!std::isfinite(loss)) {
      throw NumericError("training loss became non-finite at batch " +
                         std::to_string(result.trace.losses.size()));
    }
    adam_step(result.params, grads, adam, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    result.trace.losses.push_back(loss * inv_b);
    result.trace.samples_seen += b;
  }
  return result;
}

void save_trace(const TrainTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "batch_index\tmean_loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    out << i << '\t' << format_double(trace.losses[i]) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace matan
