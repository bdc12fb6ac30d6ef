#include "softshift/numkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "softshift/errors.hpp"
#include "softshift/numkit/kernels.hpp"

namespace softshift::numkit {
namespace {

void require_same_size(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(op) + ": lengths " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  }
}

// Gram matrix of the smaller side: M^T M when cols <= rows, else M M^T.
Matrix small_gram(const Matrix& m) {
  const std::size_t r = m.rows();
  const std::size_t c = m.cols();
  const auto& k = active_kernels();
  if (c <= r) {
    Matrix g(c, c);
    const Matrix mt = transpose(m);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = i; j < c; ++j) {
        const double v = k.dot(mt.row(i).data(), mt.row(j).data(), r);
        g(i, j) = v;
        g(j, i) = v;
      }
    }
    return g;
  }
  Matrix g(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < r; ++j) {
      const double v = k.dot(m.row(i).data(), m.row(j).data(), c);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration from `start`.
double power_iteration(const Matrix& g, Vector v, const SpectralOptions& opts) {
  const std::size_t k = g.rows();
  Vector w(k);
  double nv = l2_norm(v);
  if (nv == 0.0) return 0.0;
  v = (1.0 / nv) * v;
  double lambda = 0.0;
  double prev_delta = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    active_kernels().gemv(g.data(), k, k, v.data(), w.data());
    const double next = dot(v, w);  // Rayleigh quotient, ||v|| = 1
    const double nw = l2_norm(w);
    if (nw == 0.0) return 0.0;
    if (it > 0) {
      const double delta = std::fabs(next - lambda);
      const double scale = std::fabs(next);
      // The changes shrink geometrically with ratio q; delta q / (1 - q)
      // estimates the distance still to go.
      bool done = delta <= 4.0 * std::numeric_limits<double>::epsilon() * scale;
      if (!done && it > 1 && prev_delta > 0.0) {
        const double q = delta / prev_delta;
        done = q < 1.0 && delta * q / (1.0 - q) <= opts.tol * scale;
      }
      if (done) return std::max(next, 0.0);
      prev_delta = delta;
    }
    lambda = next;
    v = (1.0 / nw) * w;
  }
  throw NonConvergence("spectral_norm: power iteration did not reach tol " +
                       std::to_string(opts.tol) + " in " + std::to_string(opts.max_iter) +
                       " sweeps");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionMismatch("Matrix: " + std::to_string(data_.size()) + " entries for " +
                            std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Vector Matrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  return active_kernels().dot(a.data(), b.data(), a.size());
}

double sum(const Vector& v) { return active_kernels().sum(v.data(), v.size()); }

double l2_norm(const Vector& v) {
  return std::sqrt(active_kernels().dot(v.data(), v.data(), v.size()));
}

double linf_norm(const Vector& v) { return active_kernels().max_abs(v.data(), v.size()); }

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Matrix& m) {
  const auto s = m.span();
  return std::all_of(s.begin(), s.end(), [](double x) { return std::isfinite(x); });
}

double spectral_norm(const Matrix& m, SpectralOptions opts) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const Matrix g = small_gram(m);
  const std::size_t k = g.rows();
  if (k == 1) return std::sqrt(g(0, 0));
  if (k == 2) {
    const double a = g(0, 0);
    const double b = g(0, 1);
    const double c = g(1, 1);
    const double lambda = 0.5 * (a + c) + std::hypot(0.5 * (a - c), b);
    return std::sqrt(std::max(lambda, 0.0));
  }
  // A second deterministic start guards against an all-ones vector that is
  // (numerically) orthogonal to the top eigenvector.
  Vector ramp(k);
  for (std::size_t i = 0; i < k; ++i) ramp[i] = 1.0 + static_cast<double>(i) / static_cast<double>(k);
  const double lambda =
      std::max(power_iteration(g, Vector::ones(k), opts), power_iteration(g, ramp, opts));
  return std::sqrt(lambda);
}

Vector exp_elementwise(const Vector& v) {
  const double m = linf_norm(v);
  if (!(m <= kExpGuard)) {
    throw OverflowRisk("exp_elementwise: |v|_inf = " + std::to_string(m) + " exceeds " +
                       std::to_string(kExpGuard));
  }
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i]);
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_size(a, b, "hadamard");
  Vector out(a.size());
  active_kernels().mul(a.data(), b.data(), out.data(), a.size());
  return out;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw DimensionMismatch("matvec: matrix has " + std::to_string(m.cols()) +
                            " columns, vector has length " + std::to_string(v.size()));
  }
  Vector out(m.rows());
  active_kernels().gemv(m.data(), m.rows(), m.cols(), v.data(), out.data());
  return out;
}

Vector matTvec(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) {
    throw DimensionMismatch("matTvec: matrix has " + std::to_string(m.rows()) +
                            " rows, vector has length " + std::to_string(v.size()));
  }
  Vector out(m.cols());
  active_kernels().gemv_t(m.data(), m.rows(), m.cols(), v.data(), out.data());
  return out;
}

Vector operator+(const Vector& a, const Vector& b) {
  require_same_size(a, b, "operator+");
  Vector out = a;
  active_kernels().axpy(1.0, b.data(), out.data(), out.size());
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  require_same_size(a, b, "operator-");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector operator-(const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

Vector operator*(double s, const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("Matrix operator+");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  }
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("Matrix operator-");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  }
  return out;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= s;
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  const auto& k = active_kernels();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < a.cols(); ++p) {
      k.axpy(a(i, p), b.row(p).data(), out.row(i).data(), b.cols());
    }
  }
  return out;
}

}  // namespace softshift::numkit
