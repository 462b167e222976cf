#pragma once

#include <cstddef>

namespace matan::kernels::scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate);
void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c);
void adagrad_pair(double scaled_diff, double* word, double* ctx, double* word_gsq,
                  double* ctx_gsq, std::size_t n);
}  // namespace matan::kernels::scalar

namespace matan::kernels::avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate);
void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c);
void adagrad_pair(double scaled_diff, double* word, double* ctx, double* word_gsq,
                  double* ctx_gsq, std::size_t n);
}  // namespace matan::kernels::avx2
