#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "matan/error.hpp"
#include "matan/kernels.hpp"

namespace matan::kernels {
namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Relative tolerance scaled by the magnitude of the reduction.
void expect_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, scale)) << "index " << i;
  }
}

class KernelEquivalence : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    if (avx2_table() == nullptr) GTEST_SKIP() << "AVX2 kernels unavailable on this machine";
  }
};

TEST_P(KernelEquivalence, DotAndAxpy) {
  std::mt19937_64 rng(GetParam());
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 70)(rng);
  const auto x = random_vec(n, rng), y = random_vec(n, rng);
  const KernelTable& s = scalar_table();
  const KernelTable& v = *avx2_table();
  EXPECT_NEAR(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n), 1e-12 * (n + 1));
  auto ys = y, yv = y;
  s.axpy(0.37, x.data(), ys.data(), n);
  v.axpy(0.37, x.data(), yv.data(), n);
  expect_close(ys, yv, 1.0);
}

TEST_P(KernelEquivalence, Gemm) {
  std::mt19937_64 rng(500 + GetParam());
  std::uniform_int_distribution<std::size_t> dim(1, 23);
  const std::size_t m = dim(rng), n = dim(rng), k = dim(rng);
  const KernelTable& s = scalar_table();
  const KernelTable& v = *avx2_table();

  const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng), c0 = random_vec(m * n, rng);
  for (bool acc : {false, true}) {
    auto cs = c0, cv = c0;
    s.gemm_nn(m, n, k, a.data(), b.data(), cs.data(), acc);
    v.gemm_nn(m, n, k, a.data(), b.data(), cv.data(), acc);
    expect_close(cs, cv, static_cast<double>(k));
  }

  // C(k x n) += A(m x k)^T B(m x n)
  const auto at = random_vec(m * k, rng), bt = random_vec(m * n, rng), ct = random_vec(k * n, rng);
  auto cs = ct, cv = ct;
  s.gemm_tn_acc(m, n, k, at.data(), bt.data(), cs.data());
  v.gemm_tn_acc(m, n, k, at.data(), bt.data(), cv.data());
  expect_close(cs, cv, static_cast<double>(m));

  // C(m x n) = A(m x k) B(n x k)^T
  const auto bn = random_vec(n * k, rng);
  std::vector<double> ns(m * n), nv(m * n);
  s.gemm_nt(m, n, k, a.data(), bn.data(), ns.data());
  v.gemm_nt(m, n, k, a.data(), bn.data(), nv.data());
  expect_close(ns, nv, static_cast<double>(k));
}

TEST_P(KernelEquivalence, AdagradPair) {
  std::mt19937_64 rng(900 + GetParam());
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
  auto w = random_vec(n, rng), c = random_vec(n, rng);
  std::vector<double> wg(n, 1.0), cg(n, 1.0);
  auto w2 = w, c2 = c, wg2 = wg, cg2 = cg;
  scalar_table().adagrad_pair(0.3, w.data(), c.data(), wg.data(), cg.data(), n);
  avx2_table()->adagrad_pair(0.3, w2.data(), c2.data(), wg2.data(), cg2.data(), n);
  expect_close(w, w2, 1.0);
  expect_close(c, c2, 1.0);
  expect_close(wg, wg2, 1.0);
  expect_close(cg, cg2, 1.0);
}

INSTANTIATE_TEST_SUITE_P(Random, KernelEquivalence, ::testing::Range(0, 60));

TEST(ScalarKernels, SmallGemmByHand) {
  const double a[] = {1, 2, 3, 4};  // 2x2
  const double b[] = {5, 6, 7, 8};
  double c[4] = {};
  scalar_table().gemm_nn(2, 2, 2, a, b, c, false);
  EXPECT_EQ(std::vector<double>(c, c + 4), (std::vector<double>{19, 22, 43, 50}));
  scalar_table().gemm_nt(2, 2, 2, a, b, c);
  EXPECT_EQ(std::vector<double>(c, c + 4), (std::vector<double>{17, 23, 39, 53}));
  double t[4] = {1, 1, 1, 1};
  scalar_table().gemm_tn_acc(2, 2, 2, a, b, t);
  EXPECT_EQ(std::vector<double>(t, t + 4), (std::vector<double>{27, 31, 39, 45}));
}

TEST(Dispatch, SelectionByName) {
  select_backend_by_name("scalar");
  EXPECT_EQ(active().backend, Backend::kScalar);
  select_backend_by_name("auto");
  EXPECT_EQ(active().backend, available_backends().back());
  EXPECT_THROW(select_backend_by_name("sse9"), InputError);
  if (!backend_available(Backend::kAvx2)) {
    EXPECT_THROW(select_backend(Backend::kAvx2), InputError);
  } else {
    select_backend(Backend::kAvx2);
    EXPECT_EQ(backend_name(active().backend), "avx2");
  }
  select_best_backend();
}

}  // namespace
}  // namespace matan::kernels
