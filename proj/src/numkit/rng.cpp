#include "softshift/numkit/rng.hpp"

#include <cmath>
#include <numbers>

#include "softshift/errors.hpp"

namespace softshift::numkit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      engine_(splitmix64(splitmix64(master_seed) ^ splitmix64(~stream_index))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open_closed() { return 1.0 - uniform(); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw PreconditionViolation("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_open_closed();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(theta);
  has_cached_normal_ = true;
  return radius * std::cos(theta);
}

Vector RngStream::normal_vector(std::size_t n) {
  Vector v(n);
  for (auto& x : v) x = normal();
  return v;
}

Matrix RngStream::normal_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal();
  }
  return m;
}

Vector RngStream::unit_sphere(std::size_t n) {
  for (;;) {
    Vector v = normal_vector(n);
    const double norm = l2_norm(v);
    if (norm > 1e-300) return (1.0 / norm) * v;
  }
}

Vector RngStream::uniform_ball(std::size_t n, double radius) {
  Vector dir = unit_sphere(n);
  const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
  return r * dir;
}

Vector RngStream::simplex(std::size_t n) {
  Vector v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = -std::log(uniform_open_closed());
    total += x;
  }
  return (1.0 / total) * v;
}

}  // namespace softshift::numkit
