#include "softshift/harness/oracles.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <string>

#include "softshift/errors.hpp"
#include "softshift/softmax_core.hpp"

namespace softshift::harness {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

std::vector<Wide> wide_softmax(const Matrix& A, const Vector& x) {
  const std::size_t n = A.rows();
  std::vector<Wide> e(n);
  Wide total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Wide z = 0;
    for (std::size_t j = 0; j < A.cols(); ++j) z += Wide(A(i, j)) * Wide(x[j]);
    e[i] = boost::multiprecision::exp(z);
    total += e[i];
  }
  for (auto& v : e) v /= total;
  return e;
}

double loss_at(const Matrix& A, const Vector& b, const Vector& x) { return loss(A, x, b); }

Vector central_difference(const Matrix& A, const Vector& b, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = loss_at(A, b, probe);
    probe[i] = x[i] - h;
    const double down = loss_at(A, b, probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace

Vector fd_gradient(const Matrix& A, const Vector& b, const Vector& x, double h) {
  if (!(h >= 1e-8 && h <= 1e-3)) {
    throw PreconditionViolation("fd_gradient: h must lie in [1e-8, 1e-3], got " +
                                std::to_string(h));
  }
  return central_difference(A, b, x, h);
}

Vector richardson_gradient(const Matrix& A, const Vector& b, const Vector& x, double h) {
  const Vector coarse = central_difference(A, b, x, h);
  const Vector fine = central_difference(A, b, x, 0.5 * h);
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return g;
}

Vector highprec_delta_b(const shift::ShiftPair& pair) {
  if (pair.n() * pair.d() > kHighprecMaxEntries) {
    throw ScaleExceeded("highprec_delta_b: n*d = " + std::to_string(pair.n() * pair.d()) +
                        " exceeds " + std::to_string(kHighprecMaxEntries));
  }
  const auto f_next = wide_softmax(pair.A_next(), pair.x_next());
  const auto f_t = wide_softmax(pair.A_t(), pair.x_t());
  Vector out(pair.n());
  for (std::size_t i = 0; i < pair.n(); ++i) out[i] = static_cast<double>(f_next[i] - f_t[i]);
  return out;
}

}  // namespace softshift::harness
