#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "softshift/errors.hpp"
#include "softshift/numkit/linalg.hpp"
#include "softshift/numkit/rng.hpp"

using namespace softshift;
using namespace softshift::numkit;

namespace {

double svd_norm(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues()(0);
}

}  // namespace

TEST(Vector, Norms) {
  const Vector v{3, -4};
  EXPECT_EQ(l2_norm(v), 5.0);
  EXPECT_EQ(linf_norm(v), 4.0);
  EXPECT_EQ(l2_norm(Vector::zeros(5)), 0.0);
  EXPECT_EQ(linf_norm(Vector{}), 0.0);
  EXPECT_EQ(sum(Vector::ones(4)), 4.0);
  EXPECT_EQ(dot(Vector{1, 2}, Vector{3, 4}), 11.0);
}

TEST(Vector, Arithmetic) {
  const Vector a{1, 2, 3};
  const Vector b{4, 5, 6};
  EXPECT_EQ(a + b, (Vector{5, 7, 9}));
  EXPECT_EQ(b - a, (Vector{3, 3, 3}));
  EXPECT_EQ(-a, (Vector{-1, -2, -3}));
  EXPECT_EQ(2.0 * a, (Vector{2, 4, 6}));
  EXPECT_EQ(hadamard(a, b), (Vector{4, 10, 18}));
  EXPECT_THROW(a + Vector{1}, DimensionMismatch);
  EXPECT_THROW(hadamard(a, Vector{1}), DimensionMismatch);
  EXPECT_THROW(dot(a, Vector{1}), DimensionMismatch);
}

TEST(Vector, Finiteness) {
  EXPECT_TRUE(all_finite(Vector{1, 2}));
  EXPECT_FALSE(all_finite(Vector{1, std::numeric_limits<double>::quiet_NaN()}));
  EXPECT_FALSE(all_finite(Matrix{{1, std::numeric_limits<double>::infinity()}}));
}

TEST(Vector, ExpGuard) {
  const Vector e = exp_elementwise(Vector{0, 1});
  EXPECT_EQ(e[0], 1.0);
  EXPECT_EQ(e[1], std::exp(1.0));
  EXPECT_NO_THROW(exp_elementwise(Vector{700}));
  EXPECT_THROW(exp_elementwise(Vector{700.5}), OverflowRisk);
}

TEST(Matrix, ConstructionAndAccess) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.column(1), (Vector{2, 5}));
  EXPECT_EQ(m.row(1)[0], 4.0);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionMismatch);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionMismatch);
  EXPECT_EQ(Matrix::identity(2), (Matrix{{1, 0}, {0, 1}}));
}

TEST(Matrix, Products) {
  const Matrix m{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(matvec(m, Vector{1, -1}), (Vector{-1, -1, -1}));
  EXPECT_EQ(matTvec(m, Vector{1, 0, 1}), (Vector{6, 8}));
  EXPECT_EQ(transpose(m), (Matrix{{1, 3, 5}, {2, 4, 6}}));
  EXPECT_EQ(matmul(transpose(m), m), (Matrix{{35, 44}, {44, 56}}));
  EXPECT_THROW(matvec(m, Vector{1}), DimensionMismatch);
  EXPECT_THROW(matTvec(m, Vector{1}), DimensionMismatch);
  EXPECT_THROW(matmul(m, m), DimensionMismatch);
  EXPECT_THROW(m + Matrix(2, 2), DimensionMismatch);
}

TEST(SpectralNorm, ClosedForms) {
  EXPECT_EQ(spectral_norm(Matrix(3, 2)), 0.0);
  EXPECT_NEAR(spectral_norm(Matrix::identity(5)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_norm(Matrix{{1}, {-1}}), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(spectral_norm(Matrix{{3, 0}, {0, -7}}), 7.0, 1e-14);
  // Rank one: ||u v^T|| = ||u|| ||v||
  EXPECT_NEAR(spectral_norm(Matrix{{1, 2, 2}, {2, 4, 4}}), 3.0 * std::sqrt(5.0), 1e-12);
}

TEST(SpectralNorm, EqualSingularValues) {
  // Repeated top singular value, permuted.
  const Matrix m{{0, 0, 0, 2}, {0, 2, 0, 0}, {0, 0, 1, 0}, {2, 0, 0, 0}};
  EXPECT_NEAR(spectral_norm(m), 2.0, 1e-9);
}

TEST(SpectralNorm, MatchesSvdOnRandomMatrices) {
  RngStream rng(5, 0);
  for (int t = 0; t < 300; ++t) {
    const auto rows = static_cast<std::size_t>(rng.uniform_int(1, 32));
    const auto cols = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Matrix m = rng.normal_matrix(rows, cols);
    const double want = svd_norm(m);
    EXPECT_NEAR(spectral_norm(m), want, 1e-9 * want) << rows << "x" << cols;
  }
}

TEST(SpectralNorm, DominatesRandomUnitVectors) {
  RngStream rng(6, 0);
  for (int t = 0; t < 20; ++t) {
    const auto rows = static_cast<std::size_t>(rng.uniform_int(1, 16));
    const auto cols = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Matrix m = rng.normal_matrix(rows, cols);
    const double norm = spectral_norm(m);
    double best = 0.0;
    for (int k = 0; k < 10000; ++k) best = std::max(best, l2_norm(matvec(m, rng.unit_sphere(cols))));
    EXPECT_LE(best, norm * (1 + 1e-12));
    if (cols == 1) EXPECT_NEAR(best, norm, 1e-12 * norm);
    if (cols == 2) EXPECT_NEAR(best, norm, 1e-6 * norm);
  }
}

TEST(SpectralNorm, NonConvergenceIsReported) {
  RngStream rng(7, 0);
  const Matrix m = rng.normal_matrix(12, 12);
  EXPECT_THROW(spectral_norm(m, {1e-300, 1}), NonConvergence);
}

TEST(SpectralNorm, ScalesLinearly) {
  RngStream rng(8, 0);
  const Matrix m = rng.normal_matrix(9, 6);
  EXPECT_NEAR(spectral_norm(3.5 * m), 3.5 * spectral_norm(m), 1e-9 * spectral_norm(m));
  EXPECT_NEAR(spectral_norm(transpose(m)), spectral_norm(m), 1e-9 * spectral_norm(m));
}
