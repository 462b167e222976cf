#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "matan/corpus.hpp"
#include "matan/matrix.hpp"

namespace matan {

struct CoocEntry {
  TokenId row;
  TokenId col;
  double weight;

  friend bool operator==(const CoocEntry&, const CoocEntry&) = default;
};

/// Symmetric sparse co-occurrence matrix, entries sorted by (row, col).
/// No diagonal entries; every weight is > 0.
struct CoocTable {
  std::size_t vocab_size = 0;
  std::vector<CoocEntry> entries;

  /// 0 when the pair never co-occurs.
  double at(TokenId row, TokenId col) const;
  bool empty() const noexcept { return entries.empty(); }
};

/// Counts co-occurrences inside each document: a pair of tokens at distance
/// d <= window adds 1/d to both (a,b) and (b,a). Identical-token pairs and
/// the EMPTY token are skipped. When `docs` is given only those nodes are
/// counted.
CoocTable count_cooccurrences(const Corpus& corpus, std::size_t window,
                              std::optional<std::span<const NodeId>> docs = std::nullopt);

/// GloVe weighting: (x / x_max)^alpha below x_max, 1 at and above it.
double glove_weight(double x, double x_max, double alpha = 0.75);

struct GloveConfig {
  std::size_t dim = 256;
  std::size_t epochs = 50;
  double lr = 0.05;
  double x_max = 10.0;
  double alpha = 0.75;
  std::uint64_t seed = 1;
};

/// Vocabulary-indexed word vectors. Row kEmptyToken is always zero.
struct EmbeddingTable {
  std::size_t dim = 0;
  Matrix vectors;  // vocab_size x dim

  std::size_t vocab_size() const noexcept { return vectors.rows(); }
  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

/// Weighted least-squares fit of w_i . w~_j + b_i + b~_j to log X_ij with
/// per-coordinate AdaGrad, visiting entries in a seeded shuffled order.
class GloveTrainer {
 public:
  GloveTrainer(const CoocTable& cooc, const GloveConfig& cfg);

  /// One pass over all entries; returns the mean weighted loss
  /// 0.5 * f(X) * (prediction - log X)^2 accumulated during the pass.
  /// Throws NumericError if the loss becomes non-finite.
  double run_epoch();

  /// w_i . w~_j + b_i + b~_j with the current parameters.
  double predict(TokenId row, TokenId col) const;

  /// w + w~ for every token that occurs in the table; other rows (including
  /// EMPTY) are zero.
  EmbeddingTable embeddings() const;

 private:
  const CoocTable& cooc_;
  GloveConfig cfg_;
  Matrix word_, ctx_, word_gsq_, ctx_gsq_;
  std::vector<double> bias_, ctx_bias_, bias_gsq_, ctx_bias_gsq_;
  std::vector<std::size_t> order_;
  std::vector<char> seen_;
  std::mt19937_64 rng_;
};

struct GloveTrace {
  std::vector<double> epoch_loss;
};

/// Throws InputError on an empty table or dim == 0.
EmbeddingTable train_glove(const CoocTable& cooc, const GloveConfig& cfg,
                           GloveTrace* trace = nullptr);

/// Text format, one `<token> <f1> ... <fD>` line per non-EMPTY row, values
/// written in shortest round-trip form.
void save_embeddings(const EmbeddingTable& table, const Vocab& vocab,
                     const std::filesystem::path& path);

struct EmbeddingLoadStats {
  std::size_t rows = 0;
  std::size_t unknown_tokens = 0;
};

/// Rows for tokens absent from the file are zero; tokens absent from the
/// vocabulary are skipped. Throws ParseError on ragged rows or bad numbers.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                               EmbeddingLoadStats* stats = nullptr);

}  // namespace matan
