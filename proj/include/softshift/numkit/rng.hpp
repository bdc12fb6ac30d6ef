#pragma once
// Deterministic random streams.
//
// The standard library's distributions are implementation-defined, so the
// samplers here are written out explicitly on top of std::mt19937_64 (whose
// output sequence the standard fixes). A stream is identified by
// (master_seed, stream_index); both are mixed through SplitMix64 to seed the
// engine.

#include <cstdint>
#include <random>

#include "softshift/numkit/linalg.hpp"

namespace softshift::numkit {

std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_closed();
  double uniform(double lo, double hi);
  // Uniform integer on [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal (Box-Muller, the cached second variate is kept).
  double normal();

  Vector normal_vector(std::size_t n);
  Matrix normal_matrix(std::size_t rows, std::size_t cols);
  // Uniform direction on the unit sphere in R^n.
  Vector unit_sphere(std::size_t n);
  // Uniform point in the closed ball of the given radius.
  Vector uniform_ball(std::size_t n, double radius);
  // Uniform point on the probability simplex (flat Dirichlet).
  Vector simplex(std::size_t n);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace softshift::numkit
