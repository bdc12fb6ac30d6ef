#include "softshift/softmax_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "softshift/errors.hpp"
#include "softshift/numkit/kernels.hpp"

namespace softshift {

using namespace numkit;

namespace {

void require_b(const Matrix& A, const Vector& b) {
  if (b.size() != A.rows()) {
    throw DimensionMismatch("target b has length " + std::to_string(b.size()) + ", expected " +
                            std::to_string(A.rows()));
  }
}

// softmax of z, shifted by max(z).
Vector softmax(const Vector& z) {
  const double m = *std::max_element(z.begin(), z.end());
  Vector e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) e[i] = std::exp(z[i] - m);
  const double s = sum(e);
  return (1.0 / s) * e;
}

}  // namespace

Instance Instance::make(Matrix A, Vector b, double R) {
  if (A.rows() == 0 || A.cols() == 0) throw DimensionMismatch("Instance: A must be at least 1x1");
  require_b(A, b);
  if (!all_finite(A) || !all_finite(b)) throw PreconditionViolation("Instance: non-finite entry");
  if (!(R > 0.0) || !std::isfinite(R)) throw PreconditionViolation("Instance: R must be positive");
  const double norm = spectral_norm(A);
  if (norm > R * (1.0 + kNormSlack)) {
    throw PreconditionViolation("Instance: ||A|| = " + std::to_string(norm) + " exceeds R = " +
                                std::to_string(R));
  }
  return Instance{std::move(A), std::move(b), R};
}

double alpha(const Matrix& A, const Vector& x) {
  const Vector z = matvec(A, x);
  return sum(exp_elementwise(z));
}

double log_alpha(const Matrix& A, const Vector& x) {
  const Vector z = matvec(A, x);
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double zi : z) s += std::exp(zi - m);
  return m + std::log(s);
}

Vector predict(const Matrix& A, const Vector& x) { return softmax(matvec(A, x)); }

Vector residual(const Matrix& A, const Vector& x, const Vector& b) {
  require_b(A, b);
  return predict(A, x) - b;
}

double loss(const Matrix& A, const Vector& x, const Vector& b) {
  const Vector c = residual(A, x, b);
  return 0.5 * dot(c, c);
}

Vector gradient(const Matrix& A, const Vector& x, const Vector& b) {
  require_b(A, b);
  const Vector f = predict(A, x);
  const Vector c = f - b;
  const double cf = dot(c, f);
  Vector inner = hadamard(f, c);
  active_kernels().axpy(-cf, f.data(), inner.data(), inner.size());
  return matTvec(A, inner);
}

Vector jvp_exp(const Matrix& A, const Vector& x, const Vector& direction) {
  if (direction.size() != A.cols()) {
    throw DimensionMismatch("jvp_exp: direction has length " + std::to_string(direction.size()) +
                            ", expected " + std::to_string(A.cols()));
  }
  return hadamard(exp_elementwise(matvec(A, x)), matvec(A, direction));
}

}  // namespace softshift
