#include "matan/glove.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>

#include "matan/error.hpp"
#include "matan/kernels.hpp"

namespace matan {

double CoocTable::at(TokenId row, TokenId col) const {
  const CoocEntry key{row, col, 0.0};
  auto it = std::lower_bound(entries.begin(), entries.end(), key, [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  if (it == entries.end() || it->row != row || it->col != col) return 0.0;
  return it->weight;
}

CoocTable count_cooccurrences(const Corpus& corpus, std::size_t window,
                              std::optional<std::span<const NodeId>> docs) {
  if (window == 0) throw InputError("co-occurrence window must be at least 1");
  std::map<std::pair<TokenId, TokenId>, double> acc;
  auto count_doc = [&](const std::vector<TokenId>& doc) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] == kEmptyToken) continue;
      const std::size_t end = std::min(doc.size(), i + window + 1);
      for (std::size_t j = i + 1; j < end; ++j) {
        const TokenId a = doc[i], b = doc[j];
        if (a == b || b == kEmptyToken) continue;
        const double w = 1.0 / static_cast<double>(j - i);
        acc[{a, b}] += w;
        acc[{b, a}] += w;
      }
    }
  };
  if (docs) {
    for (NodeId n : *docs) count_doc(corpus.docs.at(n));
  } else {
    for (const auto& doc : corpus.docs) count_doc(doc);
  }
  CoocTable table;
  table.vocab_size = corpus.vocab.size();
  table.entries.reserve(acc.size());
  for (const auto& [key, w] : acc) table.entries.push_back({key.first, key.second, w});
  return table;
}

double glove_weight(double x, double x_max, double alpha) {
  return x < x_max ? std::pow(x / x_max, alpha) : 1.0;
}

GloveTrainer::GloveTrainer(const CoocTable& cooc, const GloveConfig& cfg)
    : cooc_(cooc), cfg_(cfg), rng_(cfg.seed) {
  if (cooc.empty()) throw InputError("GloVe: co-occurrence table is empty");
  if (cfg.dim == 0) throw InputError("GloVe: dim must be at least 1");
  const std::size_t v = cooc.vocab_size;
  const std::size_t d = cfg.dim;
  word_ = Matrix(v, d);
  ctx_ = Matrix(v, d);
  word_gsq_ = Matrix(v, d, 1.0);
  ctx_gsq_ = Matrix(v, d, 1.0);
  bias_.assign(v, 0.0);
  ctx_bias_.assign(v, 0.0);
  bias_gsq_.assign(v, 1.0);
  ctx_bias_gsq_.assign(v, 1.0);

  // Uniform in [-0.5/d, 0.5/d), as in the reference GloVe trainer.
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const double scale = 1.0 / static_cast<double>(d);
  for (double& x : word_.values()) x = unif(rng_) * scale;
  for (double& x : ctx_.values()) x = unif(rng_) * scale;
  for (double& x : bias_) x = unif(rng_) * scale;
  for (double& x : ctx_bias_) x = unif(rng_) * scale;

  seen_.assign(v, 0);
  for (const auto& e : cooc.entries) {
    if (e.row >= v || e.col >= v) throw InputError("GloVe: co-occurrence token id out of range");
    if (!(e.weight > 0.0)) throw InputError("GloVe: co-occurrence weights must be positive");
    seen_[e.row] = seen_[e.col] = 1;
  }
  order_.resize(cooc.entries.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

double GloveTrainer::run_epoch() {
  const auto& k = kernels::active();
  const std::size_t d = cfg_.dim;
  std::shuffle(order_.begin(), order_.end(), rng_);
  double total = 0.0;
  for (std::size_t idx : order_) {
    const CoocEntry& e = cooc_.entries[idx];
    double* w = word_.row(e.row).data();
    double* c = ctx_.row(e.col).data();
    const double diff =
        k.dot(w, c, d) + bias_[e.row] + ctx_bias_[e.col] - std::log(e.weight);
    const double fdiff = glove_weight(e.weight, cfg_.x_max, cfg_.alpha) * diff;
    total += 0.5 * fdiff * diff;
    if (!std::isfinite(total)) {
      throw NumericError("GloVe: loss became non-finite (lr=" + std::to_string(cfg_.lr) +
                         ", entry " + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
    }
    const double step = cfg_.lr * fdiff;
    k.adagrad_pair(step, w, c, word_gsq_.row(e.row).data(), ctx_gsq_.row(e.col).data(), d);
    bias_[e.row] -= step / std::sqrt(bias_gsq_[e.row]);
    ctx_bias_[e.col] -= step / std::sqrt(ctx_bias_gsq_[e.col]);
    bias_gsq_[e.row] += step * step;
    ctx_bias_gsq_[e.col] += step * step;
  }
  return total / static_cast<double>(order_.size());
}

double GloveTrainer::predict(TokenId row, TokenId col) const {
  return kernels::active().dot(word_.row(row).data(), ctx_.row(col).data(), cfg_.dim) +
         bias_[row] + ctx_bias_[col];
}

EmbeddingTable GloveTrainer::embeddings() const {
  EmbeddingTable t{cfg_.dim, Matrix(cooc_.vocab_size, cfg_.dim)};
  for (std::size_t r = 0; r < cooc_.vocab_size; ++r) {
    if (!seen_[r] || r == kEmptyToken) continue;
    auto out = t.vectors.row(r);
    const auto w = word_.row(r);
    const auto c = ctx_.row(r);
    for (std::size_t j = 0; j < cfg_.dim; ++j) out[j] = w[j] + c[j];
  }
  return t;
}

EmbeddingTable train_glove(const CoocTable& cooc, const GloveConfig& cfg, GloveTrace* trace) {
  GloveTrainer trainer(cooc, cfg);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const double loss = trainer.run_epoch();
    if (trace) trace->epoch_loss.push_back(loss);
  }
  return trainer.embeddings();
}

void save_embeddings(const EmbeddingTable& table, const Vocab& vocab,
                     const std::filesystem::path& path) {
  if (table.vocab_size() != vocab.size()) {
    throw InputError("save_embeddings: table rows do not match vocabulary size");
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  char buf[64];
  for (std::size_t r = 1; r < table.vocab_size(); ++r) {
    out << vocab.string_of(static_cast<TokenId>(r));
    for (double x : table.vectors.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                               EmbeddingLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings file " + path.string());
  EmbeddingLoadStats local;
  std::vector<std::pair<TokenId, std::vector<double>>> rows;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError(path.string(), lineno, "row has no values");
    const std::string token = line.substr(0, sp);
    std::vector<double> vals;
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double x = 0.0;
      const auto res = std::from_chars(p, end, x);
      if (res.ec != std::errc{} || (res.ptr != end && *res.ptr != ' ')) {
        throw ParseError(path.string(), lineno, "invalid number");
      }
      vals.push_back(x);
      p = res.ptr;
    }
    if (dim == 0) dim = vals.size();
    if (vals.size() != dim) {
      throw ParseError(path.string(), lineno,
                       "row has " + std::to_string(vals.size()) + " values, expected " +
                           std::to_string(dim));
    }
    ++local.rows;
    const TokenId* id = vocab.find(token);
    if (id == nullptr) {
      ++local.unknown_tokens;
      continue;
    }
    rows.emplace_back(*id, std::move(vals));
  }
  if (dim == 0) throw InputError("embeddings file " + path.string() + " has no rows");
  EmbeddingTable table{dim, Matrix(vocab.size(), dim)};
  for (auto& [id, vals] : rows) {
    if (id == kEmptyToken) continue;
    std::copy(vals.begin(), vals.end(), table.vectors.row(id).begin());
  }
  if (stats) *stats = local;
  return table;
}

}  // namespace matan
