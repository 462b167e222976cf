#pragma once

// Mutual scaled dot-product attention between two documents.
//
// For a target document u and a context document v (rows are word vectors):
//   Q_u = W_u P_Q,  K_v = W_v P_K,  V_v = W_v P_V
//   A   = rowsoftmax(Q_u K_v^T / sqrt(D))
//   e_u^v = pool_rows(A V_v)                  (mean by default)
// and the pair score is e_u^v . e_v^u. Training minimizes
//   -log s(score(u,v)) - sum_z log s(-score(u,z))
// with gradients obtained by explicit backprop through pooling, softmax and
// the three projections.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "matan/corpus.hpp"
#include "matan/glove.hpp"
#include "matan/matrix.hpp"

namespace matan {

enum class Pooling { kMean, kSum };

struct ModelParams {
  std::size_t dim = 0;
  Matrix pq, pk, pv;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Entries uniform in [-sqrt(6/(2D)), sqrt(6/(2D))], drawn P_Q, P_K, P_V in
/// that order from a generator seeded with `seed`.
ModelParams init_params(std::size_t dim, std::uint64_t seed);

/// Same shape as ModelParams.
struct ParamGrads {
  Matrix gq, gk, gv;

  static ParamGrads zeros(std::size_t dim);
  bool all_finite() const noexcept;
  void add_scaled(const ParamGrads& other, double scale);
};

/// L x D word-vector matrix of one document, L >= 1, entries finite.
class DocMatrix {
 public:
  /// Throws InputError on zero rows, NumericError on non-finite entries.
  explicit DocMatrix(Matrix rows);
  /// Stacks the embedding rows of `tokens` (EMPTY maps to the zero row).
  static DocMatrix lookup(const EmbeddingTable& table, std::span<const TokenId> tokens);

  const Matrix& rows() const noexcept { return rows_; }
  std::size_t length() const noexcept { return rows_.rows(); }
  std::size_t dim() const noexcept { return rows_.cols(); }

 private:
  Matrix rows_;
};

struct MutualEmbedding {
  std::vector<double> values;
};

/// Attention weights A (L_u x L_v) of u's words over v's words.
Matrix attention_weights(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params);
/// A V_v, one row per word of u.
Matrix sdpa(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params);
MutualEmbedding mutual_embed(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params,
                             Pooling pooling = Pooling::kMean);
double pair_score(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params,
                  Pooling pooling = Pooling::kMean);

/// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x);

/// Document projections under fixed parameters; reusable across pairs.
struct ProjectedDoc {
  const DocMatrix* doc = nullptr;
  Matrix q, k, v;
};
ProjectedDoc project(const DocMatrix& doc, const ModelParams& params);
double pair_score(const ProjectedDoc& u, const ProjectedDoc& v, Pooling pooling = Pooling::kMean);

struct DocPair {
  const DocMatrix* u;
  const DocMatrix* v;
};

struct LossAndGrads {
  double loss = 0.0;
  ParamGrads grads;
};

/// NCE loss of one positive pair and its k >= 1 negatives, with the exact
/// gradient with respect to P_Q, P_K and P_V.
LossAndGrads loss_and_grads(const DocPair& pos, std::span<const DocPair> negs,
                            const ModelParams& params, Pooling pooling = Pooling::kMean);

/// A set of logistic terms -log sigmoid(sign * score(u, v)) over shared
/// documents. Each distinct document is projected once and its gradient
/// contributions are summed before being pushed through the projections.
/// Documents are held by pointer and must outlive the batch.
class PairBatch {
 public:
  std::size_t add_doc(const DocMatrix& doc);
  void add_term(std::size_t u, std::size_t v, double sign);

  std::size_t doc_count() const noexcept { return docs_.size(); }
  std::size_t term_count() const noexcept { return terms_.size(); }

  /// Returns the summed loss and adds `scale` times its gradient to `grads`.
  /// With threads > 1 the terms are split into contiguous slices whose
  /// gradients are reduced in slice order.
  double loss_and_grads(const ModelParams& params, Pooling pooling, ParamGrads& grads,
                        double scale = 1.0, unsigned threads = 1) const;

 private:
  struct Term {
    std::size_t u, v;
    double sign;
  };
  double run_slice(const ModelParams& params, Pooling pooling, std::size_t begin,
                   std::size_t end, ParamGrads& grads, double scale) const;

  std::vector<const DocMatrix*> docs_;
  std::vector<Term> terms_;
};

/// Text model file:
///   MATAN-MODEL v1
///   dim <D>
///   PQ / D rows / PK / D rows / PV / D rows
/// Values are written in shortest round-trip form.
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace matan
