// Straight-line reference kernels. These define the expected results that
// the vectorized variants are tested against.

#include <cmath>

#include "kernel_impls.hpp"

namespace matan::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c) {
  for (std::size_t r = 0; r < m; ++r) {
    const double* arow = a + r * k;
    const double* brow = b + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double arp = arow[p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += arp * brow[j];
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = dot(a + i * k, b + j * k, k);
    }
  }
}

void adagrad_pair(double scaled_diff, double* word, double* ctx, double* word_gsq,
                  double* ctx_gsq, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g1 = scaled_diff * ctx[i];
    const double g2 = scaled_diff * word[i];
    word[i] -= g1 / std::sqrt(word_gsq[i]);
    ctx[i] -= g2 / std::sqrt(ctx_gsq[i]);
    word_gsq[i] += g1 * g1;
    ctx_gsq[i] += g2 * g2;
  }
}

}  // namespace matan::kernels::scalar
