#pragma once
// Softmax regression: prediction f(x) = softmax(Ax), loss 0.5 ||f(x) - b||^2,
// and its closed-form gradient.
//
// None of the evaluation functions below enforce a norm radius on x. Radius
// checks belong to the bound/certificate layer (shift_analysis.hpp).

#include "softshift/numkit/linalg.hpp"

namespace softshift {

using numkit::Matrix;
using numkit::Vector;

// A softmax regression problem with its norm radius. make() validates
// spectral_norm(A) <= R (to a relative slack of kNormSlack), finiteness,
// and that b has one entry per row of A.
struct Instance {
  Matrix A;
  Vector b;
  double R = 0.0;

  static Instance make(Matrix A, Vector b, double R);

  std::size_t n() const noexcept { return A.rows(); }
  std::size_t d() const noexcept { return A.cols(); }
};

// Relative slack allowed when comparing a computed spectral norm against R.
// Power iteration is accurate to ~1e-10 relative; a matrix rescaled to exactly
// R must not be rejected for rounding.
inline constexpr double kNormSlack = 1e-9;

// <exp(Ax), 1_n>. Throws OverflowRisk when ||Ax||_inf > 700.
double alpha(const Matrix& A, const Vector& x);

// ln alpha(A, x) via max-shifted log-sum-exp; never overflows.
double log_alpha(const Matrix& A, const Vector& x);

// Numerically stable softmax of Ax.
Vector predict(const Matrix& A, const Vector& x);

// c(x) = f(x) - b.
Vector residual(const Matrix& A, const Vector& x, const Vector& b);

double loss(const Matrix& A, const Vector& x, const Vector& b);

// dL/dx = A^T (f o c - f <c, f>), formed in one pass with no n x n temporaries.
// The softmax Jacobian is diag(f) - f f^T, hence the minus.
Vector gradient(const Matrix& A, const Vector& x, const Vector& b);

// Directional derivative of exp(Ax) along `direction`: exp(Ax) o (A direction).
Vector jvp_exp(const Matrix& A, const Vector& x, const Vector& direction);

}  // namespace softshift
