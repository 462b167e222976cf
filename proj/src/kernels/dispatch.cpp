#include <array>

#include "kernel_impls.hpp"
#include "matan/error.hpp"
#include "matan/kernels.hpp"

namespace matan::kernels {
namespace {

constexpr KernelTable kScalar{Backend::kScalar,  "scalar",           scalar::dot,
                              scalar::axpy,     scalar::gemm_nn,    scalar::gemm_tn_acc,
                              scalar::gemm_nt,  scalar::adagrad_pair};

#ifdef MATAN_HAVE_AVX2
constexpr KernelTable kAvx2{Backend::kAvx2,  "avx2",           avx2::dot,
                            avx2::axpy,     avx2::gemm_nn,    avx2::gemm_tn_acc,
                            avx2::gemm_nt,  avx2::adagrad_pair};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable* best_table() {
#ifdef MATAN_HAVE_AVX2
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const KernelTable*& current() {
  static const KernelTable* table = best_table();
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#ifdef MATAN_HAVE_AVX2
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return nullptr;
}

const KernelTable& active() { return *current(); }

bool backend_available(Backend b) {
  return b == Backend::kScalar || avx2_table() != nullptr;
}

void select_backend(Backend b) {
  if (b == Backend::kScalar) {
    current() = &kScalar;
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw InputError("AVX2 kernels are not available on this machine");
  current() = t;
}

void select_best_backend() { current() = best_table(); }

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::kScalar};
  if (avx2_table() != nullptr) out.push_back(Backend::kAvx2);
  return out;
}

std::string_view backend_name(Backend b) {
  return b == Backend::kScalar ? "scalar" : "avx2";
}

void select_backend_by_name(std::string_view name) {
  if (name == "auto") {
    select_best_backend();
  } else if (name == "scalar") {
    select_backend(Backend::kScalar);
  } else if (name == "avx2") {
    select_backend(Backend::kAvx2);
  } else {
    throw InputError("unknown kernel backend '" + std::string(name) +
                     "' (expected scalar, avx2 or auto)");
  }
}

}  // namespace matan::kernels
