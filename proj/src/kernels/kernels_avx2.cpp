// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after CPUID confirms support.

#include <immintrin.h>

#include <cmath>

#include "kernel_impls.hpp"

namespace matan::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// R rows of C (row stride n) computed from an R x inner panel of A, where
// element (r, p) of the panel sits at a[r * a_rs + p * a_cs], and rows of B
// (row stride n) indexed by p.
template <int R>
void row_block(std::size_t n, std::size_t inner, const double* a,
               std::size_t a_rs, std::size_t a_cs, const double* b, double* c,
               bool accumulate) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc[R][2];
    for (int r = 0; r < R; ++r) {
      if (accumulate) {
        acc[r][0] = _mm256_loadu_pd(c + r * n + j);
        acc[r][1] = _mm256_loadu_pd(c + r * n + j + 4);
      } else {
        acc[r][0] = _mm256_setzero_pd();
        acc[r][1] = _mm256_setzero_pd();
      }
    }
    for (std::size_t p = 0; p < inner; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d ar = _mm256_broadcast_sd(a + r * a_rs + p * a_cs);
        acc[r][0] = _mm256_fmadd_pd(ar, b0, acc[r][0]);
        acc[r][1] = _mm256_fmadd_pd(ar, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + r * n + j, acc[r][0]);
      _mm256_storeu_pd(c + r * n + j + 4, acc[r][1]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc[R];
    for (int r = 0; r < R; ++r) {
      acc[r] = accumulate ? _mm256_loadu_pd(c + r * n + j) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < inner; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      for (int r = 0; r < R; ++r) {
        acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * a_rs + p * a_cs), b0, acc[r]);
      }
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + r * n + j, acc[r]);
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = accumulate ? c[r * n + j] : 0.0;
      for (std::size_t p = 0; p < inner; ++p) s += a[r * a_rs + p * a_cs] * b[p * n + j];
      c[r * n + j] = s;
    }
  }
}

void panel_gemm(std::size_t rows, std::size_t n, std::size_t inner,
                const double* a, std::size_t a_rs, std::size_t a_cs,
                const double* b, double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    row_block<4>(n, inner, a + i * a_rs, a_rs, a_cs, b, c + i * n, accumulate);
  }
  switch (rows - i) {
    case 3: row_block<3>(n, inner, a + i * a_rs, a_rs, a_cs, b, c + i * n, accumulate); break;
    case 2: row_block<2>(n, inner, a + i * a_rs, a_rs, a_cs, b, c + i * n, accumulate); break;
    case 1: row_block<1>(n, inner, a + i * a_rs, a_rs, a_cs, b, c + i * n, accumulate); break;
    default: break;
  }
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  panel_gemm(m, n, k, a, k, 1, b, c, accumulate);
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c) {
  // Row p of C gathers column p of A.
  panel_gemm(k, n, m, a, 1, k, b, c, true);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
      for (; p < k; ++p) {
        r0 += arow[p] * b0[p];
        r1 += arow[p] * b1[p];
        r2 += arow[p] * b2[p];
        r3 += arow[p] * b3[p];
      }
      double* crow = c + i * n + j;
      crow[0] = r0;
      crow[1] = r1;
      crow[2] = r2;
      crow[3] = r3;
    }
    for (; j < n; ++j) c[i * n + j] = dot(arow, b + j * k, k);
  }
}

void adagrad_pair(double scaled_diff, double* word, double* ctx, double* word_gsq,
                  double* ctx_gsq, std::size_t n) {
  const __m256d f = _mm256_set1_pd(scaled_diff);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_loadu_pd(word + i);
    const __m256d c = _mm256_loadu_pd(ctx + i);
    const __m256d gw = _mm256_loadu_pd(word_gsq + i);
    const __m256d gc = _mm256_loadu_pd(ctx_gsq + i);
    const __m256d g1 = _mm256_mul_pd(f, c);
    const __m256d g2 = _mm256_mul_pd(f, w);
    _mm256_storeu_pd(word + i, _mm256_sub_pd(w, _mm256_div_pd(g1, _mm256_sqrt_pd(gw))));
    _mm256_storeu_pd(ctx + i, _mm256_sub_pd(c, _mm256_div_pd(g2, _mm256_sqrt_pd(gc))));
    _mm256_storeu_pd(word_gsq + i, _mm256_fmadd_pd(g1, g1, gw));
    _mm256_storeu_pd(ctx_gsq + i, _mm256_fmadd_pd(g2, g2, gc));
  }
  for (; i < n; ++i) {
    const double g1 = scaled_diff * ctx[i];
    const double g2 = scaled_diff * word[i];
    word[i] -= g1 / std::sqrt(word_gsq[i]);
    ctx[i] -= g2 / std::sqrt(ctx_gsq[i]);
    word_gsq[i] += g1 * g1;
    ctx_gsq[i] += g2 * g2;
  }
}

}  // namespace matan::kernels::avx2
