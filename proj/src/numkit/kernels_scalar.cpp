#include <cmath>
#include <cstddef>

#include "softshift/numkit/kernels.hpp"

namespace softshift::numkit {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols,
                 const double* v, double* out) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = dot_scalar(m + i * cols, v, cols);
}

void gemv_t_scalar(const double* m, std::size_t rows, std::size_t cols,
                   const double* v, double* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy_scalar(v[i], m + i * cols, out, cols);
}

constexpr KernelTable kScalar{
    Isa::scalar, dot_scalar, sum_scalar,  max_abs_scalar,
    mul_scalar,  axpy_scalar, gemv_scalar, gemv_t_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace softshift::numkit
