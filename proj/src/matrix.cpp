#include "matan/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "matan/error.hpp"
#include "matan/kernels.hpp"

namespace matan {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw InputError("matrix data size does not match its shape");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw InputError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InputError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data(), false);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw InputError("matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data());
  return c;
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw InputError("matmul_tn_acc: shape mismatch");
  }
  kernels::active().gemm_tn_acc(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
}

}  // namespace matan
