#include <gtest/gtest.h>

#include <cmath>

#include "softshift/numkit/rng.hpp"

using namespace softshift::numkit;

TEST(Rng, SplitMixKnownValue) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  RngStream a(1, 2), b(1, 2), c(1, 3), d(2, 2);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Rng, UniformRanges) {
  RngStream rng(3, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double v = rng.uniform_open_closed();
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    const auto k = rng.uniform_int(-3, 5);
    EXPECT_GE(k, -3);
    EXPECT_LE(k, 5);
  }
  EXPECT_EQ(rng.uniform_int(4, 4), 4);
}

TEST(Rng, UniformIntHitsEveryValue) {
  RngStream rng(4, 0);
  int counts[6] = {};
  for (int i = 0; i < 6000; ++i) ++counts[rng.uniform_int(0, 5)];
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(Rng, NormalMoments) {
  RngStream rng(5, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, GeometricSamplers) {
  RngStream rng(6, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 9));
    EXPECT_NEAR(l2_norm(rng.unit_sphere(n)), 1.0, 1e-14);
    EXPECT_LE(l2_norm(rng.uniform_ball(n, 2.5)), 2.5);
    const Vector p = rng.simplex(n);
    EXPECT_NEAR(sum(p), 1.0, 1e-14);
    for (double v : p) EXPECT_GE(v, 0.0);
  }
}

TEST(Rng, BallRadiusDistribution) {
  // P(||x|| <= r/2) = 2^-n for the uniform ball.
  RngStream rng(7, 0);
  int inside = 0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) inside += l2_norm(rng.uniform_ball(2, 1.0)) <= 0.5;
  EXPECT_NEAR(static_cast<double>(inside) / trials, 0.25, 0.01);
}
