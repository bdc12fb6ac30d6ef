#pragma once
// Minimal dense linear algebra over 64-bit floats.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace softshift::numkit {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vector&) const = default;

  static Vector ones(std::size_t n) { return Vector(n, 1.0); }
  static Vector zeros(std::size_t n) { return Vector(n, 0.0); }

 private:
  std::vector<double> data_;
};

// Dense row-major matrix. rows() and cols() are at least 1 for any matrix
// built through the public constructors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws DimensionMismatch on ragged input.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;

  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }
  std::span<const double> span() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

  static Matrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SpectralOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

double l2_norm(const Vector& v);
double linf_norm(const Vector& v);
double dot(const Vector& a, const Vector& b);
double sum(const Vector& v);
bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Largest singular value. Closed form when min(rows, cols) <= 2, otherwise
// power iteration on the smaller Gram matrix from the normalized all-ones
// start. Iterates until the estimated relative error of the top eigenvalue of
// the Gram matrix is below opts.tol; throws NonConvergence after
// opts.max_iter sweeps.
double spectral_norm(const Matrix& m, SpectralOptions opts = {});

// Throws OverflowRisk if linf_norm(v) > kExpGuard.
inline constexpr double kExpGuard = 700.0;
Vector exp_elementwise(const Vector& v);

Vector hadamard(const Vector& a, const Vector& b);
Vector matvec(const Matrix& m, const Vector& v);
Vector matTvec(const Matrix& m, const Vector& v);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator-(const Vector& a);
Vector operator*(double s, const Vector& v);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);
Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace softshift::numkit
