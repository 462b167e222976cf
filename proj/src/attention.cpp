#include "matan/attention.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <thread>

#include "matan/error.hpp"
#include "matan/kernels.hpp"

namespace matan {
namespace {

void check_params(const ModelParams& p) {
  const std::size_t d = p.dim;
  if (d == 0 || p.pq.rows() != d || p.pq.cols() != d || !p.pk.same_shape(p.pq) ||
      !p.pv.same_shape(p.pq)) {
    throw InputError("model parameters must be three D x D matrices");
  }
  if (!p.pq.all_finite() || !p.pk.all_finite() || !p.pv.all_finite()) {
    throw NumericError("model parameters contain non-finite values");
  }
}

void check_doc(const DocMatrix& doc, const ModelParams& p) {
  if (doc.dim() != p.dim) {
    throw InputError("document dimension " + std::to_string(doc.dim()) +
                     " does not match model dimension " + std::to_string(p.dim));
  }
}

double pool_factor(Pooling pooling, std::size_t rows) {
  return pooling == Pooling::kMean ? 1.0 / static_cast<double>(rows) : 1.0;
}

// Row softmax of (Q_a K_b^T / sqrt(D)) with per-row max subtraction.
Matrix softmax_scores(const Matrix& q, const Matrix& k) {
  Matrix s = matmul_nt(q, k);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    double mx = -INFINITY;
    for (double& x : row) {
      x *= inv_sqrt_d;
      mx = std::max(mx, x);
    }
    double z = 0.0;
    for (double& x : row) {
      x = std::exp(x - mx);
      z += x;
    }
    const double inv_z = 1.0 / z;
    for (double& x : row) x *= inv_z;
  }
  return s;
}

// One attention direction: target a attends over context b.
struct Direction {
  Matrix weights;               // L_a x L_b
  std::vector<double> col_w;    // pooled weight of each context row
  std::vector<double> embed;    // D
};

Direction forward(const ProjectedDoc& a, const ProjectedDoc& b, Pooling pooling) {
  Direction dir;
  dir.weights = softmax_scores(a.q, b.k);
  const std::size_t la = dir.weights.rows(), lb = dir.weights.cols();
  const double f = pool_factor(pooling, la);
  dir.col_w.assign(lb, 0.0);
  for (std::size_t i = 0; i < la; ++i) {
    const auto row = dir.weights.row(i);
    for (std::size_t j = 0; j < lb; ++j) dir.col_w[j] += row[j];
  }
  for (double& w : dir.col_w) w *= f;
  const std::size_t d = b.v.cols();
  dir.embed.assign(d, 0.0);
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < lb; ++j) k.axpy(dir.col_w[j], b.v.row(j).data(), dir.embed.data(), d);
  return dir;
}

struct DocGrad {
  Matrix dq, dk, dv;
  bool used = false;

  void ensure(std::size_t l, std::size_t d) {
    if (used) return;
    dq = Matrix(l, d);
    dk = Matrix(l, d);
    dv = Matrix(l, d);
    used = true;
  }
};

// Backprop of an upstream gradient on dir.embed into the per-document
// accumulators of a (query side) and b (key/value side).
void backward(const ProjectedDoc& a, const ProjectedDoc& b, const Direction& dir,
              std::span<const double> d_embed, Pooling pooling, DocGrad& ga, DocGrad& gb) {
  const auto& k = kernels::active();
  const std::size_t la = dir.weights.rows(), lb = dir.weights.cols(), d = d_embed.size();
  const double f = pool_factor(pooling, la);
  ga.ensure(la, d);
  gb.ensure(lb, d);

  std::vector<double> c(lb);
  for (std::size_t j = 0; j < lb; ++j) {
    c[j] = f * k.dot(d_embed.data(), b.v.row(j).data(), d);
    k.axpy(dir.col_w[j], d_embed.data(), gb.dv.row(j).data(), d);
  }

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix ds(la, lb);
  for (std::size_t i = 0; i < la; ++i) {
    const auto arow = dir.weights.row(i);
    double r = 0.0;
    for (std::size_t j = 0; j < lb; ++j) r += arow[j] * c[j];
    auto dsrow = ds.row(i);
    for (std::size_t j = 0; j < lb; ++j) dsrow[j] = arow[j] * (c[j] - r) * inv_sqrt_d;
  }
  k.gemm_nn(la, d, lb, ds.data(), b.k.data(), ga.dq.data(), true);
  k.gemm_tn_acc(la, d, lb, ds.data(), a.q.data(), gb.dk.data());
}

double dot(std::span<const double> x, std::span<const double> y) {
  return kernels::active().dot(x.data(), y.data(), x.size());
}

}  // namespace

ModelParams init_params(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw InputError("model dimension must be at least 1");
  const double bound = std::sqrt(6.0 / (2.0 * static_cast<double>(dim)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-bound, bound);
  ModelParams p{dim, Matrix(dim, dim), Matrix(dim, dim), Matrix(dim, dim)};
  for (Matrix* m : {&p.pq, &p.pk, &p.pv}) {
    for (double& x : m->values()) x = unif(rng);
  }
  return p;
}

ParamGrads ParamGrads::zeros(std::size_t dim) {
  return {Matrix(dim, dim), Matrix(dim, dim), Matrix(dim, dim)};
}

bool ParamGrads::all_finite() const noexcept {
  return gq.all_finite() && gk.all_finite() && gv.all_finite();
}

void ParamGrads::add_scaled(const ParamGrads& other, double scale) {
  const auto& k = kernels::active();
  k.axpy(scale, other.gq.data(), gq.data(), gq.size());
  k.axpy(scale, other.gk.data(), gk.data(), gk.size());
  k.axpy(scale, other.gv.data(), gv.data(), gv.size());
}

DocMatrix::DocMatrix(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0) throw InputError("a document needs at least one word row");
  if (!rows_.all_finite()) throw NumericError("document matrix contains non-finite values");
}

DocMatrix DocMatrix::lookup(const EmbeddingTable& table, std::span<const TokenId> tokens) {
  Matrix m(tokens.size(), table.dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= table.vocab_size()) throw InputError("token id outside the embedding table");
    if (tokens[i] == kEmptyToken) continue;
    const auto src = table.vectors.row(tokens[i]);
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return DocMatrix(std::move(m));
}

ProjectedDoc project(const DocMatrix& doc, const ModelParams& params) {
  return {&doc, matmul(doc.rows(), params.pq), matmul(doc.rows(), params.pk),
          matmul(doc.rows(), params.pv)};
}

Matrix attention_weights(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params) {
  check_params(params);
  check_doc(w_u, params);
  check_doc(w_v, params);
  return softmax_scores(matmul(w_u.rows(), params.pq), matmul(w_v.rows(), params.pk));
}

Matrix sdpa(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params) {
  const Matrix weights = attention_weights(w_u, w_v, params);
  return matmul(weights, matmul(w_v.rows(), params.pv));
}

MutualEmbedding mutual_embed(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params,
                             Pooling pooling) {
  check_params(params);
  check_doc(w_u, params);
  check_doc(w_v, params);
  return {forward(project(w_u, params), project(w_v, params), pooling).embed};
}

double pair_score(const ProjectedDoc& u, const ProjectedDoc& v, Pooling pooling) {
  const Direction uv = forward(u, v, pooling);
  const Direction vu = forward(v, u, pooling);
  return dot(uv.embed, vu.embed);
}

double pair_score(const DocMatrix& w_u, const DocMatrix& w_v, const ModelParams& params,
                  Pooling pooling) {
  check_params(params);
  check_doc(w_u, params);
  check_doc(w_v, params);
  return pair_score(project(w_u, params), project(w_v, params), pooling);
}

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

std::size_t PairBatch::add_doc(const DocMatrix& doc) {
  docs_.push_back(&doc);
  return docs_.size() - 1;
}

void PairBatch::add_term(std::size_t u, std::size_t v, double sign) {
  if (u >= docs_.size() || v >= docs_.size()) throw InputError("PairBatch: unknown document index");
  terms_.push_back({u, v, sign});
}

double PairBatch::run_slice(const ModelParams& params, Pooling pooling, std::size_t begin,
                            std::size_t end, ParamGrads& grads, double scale) const {
  std::vector<ProjectedDoc> proj(docs_.size());
  std::vector<char> projected(docs_.size(), 0);
  auto projected_doc = [&](std::size_t i) -> const ProjectedDoc& {
    if (!projected[i]) {
      proj[i] = project(*docs_[i], params);
      projected[i] = 1;
    }
    return proj[i];
  };
  std::vector<DocGrad> doc_grads(docs_.size());

  double total = 0.0;
  std::vector<double> d_uv(params.dim), d_vu(params.dim);
  for (std::size_t t = begin; t < end; ++t) {
    const Term& term = terms_[t];
    const ProjectedDoc& pu = projected_doc(term.u);
    const ProjectedDoc& pv = projected_doc(term.v);
    const Direction uv = forward(pu, pv, pooling);
    const Direction vu = forward(pv, pu, pooling);
    const double s = dot(uv.embed, vu.embed);
    total -= log_sigmoid(term.sign * s);
    // d/ds [-log sigmoid(sign * s)] = -sign * sigmoid(-sign * s)
    const double g = -term.sign * std::exp(log_sigmoid(-term.sign * s)) * scale;
    for (std::size_t i = 0; i < params.dim; ++i) {
      d_uv[i] = g * vu.embed[i];
      d_vu[i] = g * uv.embed[i];
    }
    backward(pu, pv, uv, d_uv, pooling, doc_grads[term.u], doc_grads[term.v]);
    backward(pv, pu, vu, d_vu, pooling, doc_grads[term.v], doc_grads[term.u]);
  }

  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!doc_grads[i].used) continue;
    const Matrix& w = docs_[i]->rows();
    matmul_tn_acc(w, doc_grads[i].dq, grads.gq);
    matmul_tn_acc(w, doc_grads[i].dk, grads.gk);
    matmul_tn_acc(w, doc_grads[i].dv, grads.gv);
  }
  return total;
}

double PairBatch::loss_and_grads(const ModelParams& params, Pooling pooling, ParamGrads& grads,
                                 double scale, unsigned threads) const {
  check_params(params);
  for (const DocMatrix* d : docs_) check_doc(*d, params);
  if (!grads.gq.same_shape(params.pq) || !grads.gk.same_shape(params.pk) ||
      !grads.gv.same_shape(params.pv)) {
    throw InputError("gradient accumulator shape does not match the model");
  }
  const std::size_t n = terms_.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) return run_slice(params, pooling, 0, n, grads, scale);

  std::vector<ParamGrads> partial(threads, ParamGrads::zeros(params.dim));
  std::vector<double> losses(threads, 0.0);
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = n * w / threads, e = n * (w + 1) / threads;
      workers.emplace_back([&, w, b, e] {
        try {
          losses[w] = run_slice(params, pooling, b, e, partial[w], scale);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  double total = 0.0;
  for (unsigned w = 0; w < threads; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
    grads.add_scaled(partial[w], 1.0);
    total += losses[w];
  }
  return total;
}

LossAndGrads loss_and_grads(const DocPair& pos, std::span<const DocPair> negs,
                            const ModelParams& params, Pooling pooling) {
  if (negs.empty()) throw InputError("loss_and_grads needs at least one negative pair");
  PairBatch batch;
  batch.add_term(batch.add_doc(*pos.u), batch.add_doc(*pos.v), 1.0);
  for (const DocPair& neg : negs) {
    batch.add_term(batch.add_doc(*neg.u), batch.add_doc(*neg.v), -1.0);
  }
  LossAndGrads out{0.0, ParamGrads::zeros(params.dim)};
  out.loss = batch.loss_and_grads(params, pooling, out.grads);
  return out;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  check_params(params);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file " + path.string());
  out << "MATAN-MODEL v1\n" << "dim " << params.dim << '\n';
  char buf[64];
  const std::pair<const char*, const Matrix*> blocks[] = {
      {"PQ", &params.pq}, {"PK", &params.pk}, {"PV", &params.pv}};
  for (const auto& [label, m] : blocks) {
    out << label << '\n';
    for (std::size_t r = 0; r < params.dim; ++r) {
      const auto row = m->row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto res = std::to_chars(buf, buf + sizeof buf, row[c]);
        if (c) out << ' ';
        out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
      }
      out << '\n';
    }
  }
  if (!out) throw InputError("failed writing model file " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  const std::string p = path.string();
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(p, lineno + 1, "unexpected end of model file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next() != "MATAN-MODEL v1") throw ParseError(p, lineno, "missing 'MATAN-MODEL v1' header");
  const std::string& dim_line = next();
  std::size_t dim = 0;
  if (dim_line.rfind("dim ", 0) != 0 ||
      std::from_chars(dim_line.data() + 4, dim_line.data() + dim_line.size(), dim).ec !=
          std::errc{} ||
      dim == 0) {
    throw ParseError(p, lineno, "expected 'dim <D>'");
  }
  ModelParams params{dim, Matrix(dim, dim), Matrix(dim, dim), Matrix(dim, dim)};
  const std::pair<const char*, Matrix*> blocks[] = {
      {"PQ", &params.pq}, {"PK", &params.pk}, {"PV", &params.pv}};
  for (const auto& [label, m] : blocks) {
    if (next() != label) throw ParseError(p, lineno, std::string("expected block label ") + label);
    for (std::size_t r = 0; r < dim; ++r) {
      const std::string& row = next();
      const char* it = row.data();
      const char* end = row.data() + row.size();
      for (std::size_t c = 0; c < dim; ++c) {
        while (it < end && *it == ' ') ++it;
        const auto res = std::from_chars(it, end, (*m)(r, c));
        if (res.ec != std::errc{}) throw ParseError(p, lineno, "invalid number in model row");
        it = res.ptr;
      }
      while (it < end && *it == ' ') ++it;
      if (it != end) throw ParseError(p, lineno, "model row has more than dim values");
    }
  }
  check_params(params);
  return params;
}

}  // namespace matan
