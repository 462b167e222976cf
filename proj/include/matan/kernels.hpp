#pragma once

// Dense float64 kernels used by the attention and GloVe inner loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at startup from CPUID and can
// be overridden with select_backend(). All matrices are row-major and
// contiguous.

#include <cstddef>
#include <string_view>
#include <vector>

namespace matan::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  const char* name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C(m x n) = A(m x k) * B(k x n), or += when accumulate is set.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // C(k x n) += A(m x k)^T * B(m x n)
  void (*gemm_tn_acc)(std::size_t m, std::size_t n, std::size_t k,
                      const double* a, const double* b, double* c);
  // C(m x n) = A(m x k) * B(n x k)^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // One AdaGrad step on a GloVe word/context pair. With g1 = scaled_diff *
  // ctx and g2 = scaled_diff * word (both from the old values):
  // word -= g1 / sqrt(word_gsq); ctx -= g2 / sqrt(ctx_gsq); gsq += g^2.
  void (*adagrad_pair)(double scaled_diff, double* word, double* ctx,
                       double* word_gsq, double* ctx_gsq, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Currently selected kernels.
const KernelTable& active();

bool backend_available(Backend b);
/// Throws InputError if the backend is not available on this machine.
void select_backend(Backend b);
/// Re-runs CPU detection and picks the fastest available backend.
void select_best_backend();

std::vector<Backend> available_backends();
std::string_view backend_name(Backend b);
/// Accepts "scalar", "avx2" or "auto".
void select_backend_by_name(std::string_view name);

}  // namespace matan::kernels
