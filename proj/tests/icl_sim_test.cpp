#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "softshift/errors.hpp"
#include "softshift/harness/sampler.hpp"
#include "softshift/icl_sim.hpp"

using namespace softshift;
using namespace softshift::icl;

namespace {

Instance sampled_instance(std::int64_t i, Vector* x0 = nullptr) {
  harness::SampleConfig c;
  const auto pair = harness::sample_instance(c, i);
  if (x0 != nullptr) *x0 = pair.x_t();
  return Instance::make(pair.A_t(), pair.b(), pair.R());
}

Vector row_of(const Matrix& A, std::size_t k) {
  return Vector(std::vector<double>(A.row(k).begin(), A.row(k).end()));
}

}  // namespace

TEST(GdStep, SignConventions) {
  const auto inst = Instance::make(Matrix{{1}, {-1}}, Vector{1, 0}, 4.0);
  GDConfig cfg;
  cfg.eta = 0.1;
  EXPECT_DOUBLE_EQ(gd_step(inst, Vector{0}, cfg)[0], 0.05);
  cfg.sign = StepSign::paper_plus;
  EXPECT_DOUBLE_EQ(gd_step(inst, Vector{0}, cfg)[0], -0.05);
  EXPECT_STREQ(to_string(StepSign::paper_plus), "paper_plus");
}

TEST(GdStep, PerfectFitIsFixedPoint) {
  const Matrix A{{1}, {-1}};
  const Vector x{0.4};
  const auto inst = Instance::make(A, predict(A, x), 4.0);
  EXPECT_EQ(gd_step(inst, x, {}), x);
}

TEST(GdStep, InvalidConfig) {
  const auto inst = Instance::make(Matrix{{1}, {-1}}, Vector{1, 0}, 4.0);
  GDConfig cfg;
  cfg.eta = 0.0;
  EXPECT_THROW(gd_step(inst, Vector{0}, cfg), PreconditionViolation);
  cfg.eta = 0.1;
  cfg.steps = 0;
  EXPECT_THROW(gd_step(inst, Vector{0}, cfg), PreconditionViolation);
}

TEST(GdStep, BacktrackingNeverIncreasesLoss) {
  for (int i = 0; i < 20; ++i) {
    Vector x;
    const auto inst = sampled_instance(i, &x);
    GDConfig cfg;
    cfg.eta = 50.0;
    cfg.backtracking = true;
    for (int s = 0; s < 20; ++s) {
      const Vector next = gd_step(inst, x, cfg);
      EXPECT_LE(loss(inst.A, next, inst.b), loss(inst.A, x, inst.b) + kBacktrackTol);
      x = next;
    }
  }
}

TEST(InducedTarget, ReproducesNextResidual) {
  for (int i = 0; i < 100; ++i) {
    harness::SampleConfig c;
    const auto pair = harness::sample_instance(c, i);
    const auto inst = Instance::make(pair.A_t(), pair.b(), pair.R());
    const Vector b_tilde = induced_target(inst, pair.x_t(), pair.x_next());
    const double lhs = numkit::l2_norm(predict(inst.A, pair.x_next()) - inst.b);
    const double rhs = numkit::l2_norm(predict(inst.A, pair.x_t()) - b_tilde);
    EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
  }
}

TEST(InducedTarget, RejectsLargeSteps) {
  const auto inst = Instance::make(Matrix{{1}, {-1}}, Vector{1, 0}, 4.0);
  EXPECT_THROW(induced_target(inst, Vector{0}, Vector{0.5}), PreconditionViolation);
}

TEST(LinearGd, InducedTargetIdentity) {
  numkit::RngStream rng(4, 0);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 32));
    const auto d = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Matrix A = rng.normal_matrix(n, d);
    const Vector b = rng.normal_vector(n);
    const Vector x = rng.normal_vector(d);
    const auto step = linear_gd_induced_target(A, b, x, 0.01);
    const double lhs = numkit::l2_norm(matvec(A, step.x_next) - b);
    const double rhs = numkit::l2_norm(matvec(A, x) - step.b_tilde);
    EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
  }
  EXPECT_THROW(linear_gd_induced_target(Matrix{{1}}, Vector{1, 2}, Vector{0}, 0.1),
               DimensionMismatch);
}

TEST(Attention, GdWeightsReproduceOneStepFromZero) {
  numkit::RngStream rng(5, 0);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 32));
    const auto d = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Matrix A = rng.normal_matrix(n, d);
    const Vector b = rng.normal_vector(n);
    const Vector q = rng.normal_vector(d);
    const double eta = 0.05;
    TokenSet tokens;
    for (std::size_t k = 0; k < n; ++k) tokens.context.push_back({row_of(A, k), b[k]});
    tokens.query = {q, 0.0};
    const TokenSet out = attention_step_linear(tokens, construct_gd_weights(d, eta));

    const auto step = linear_gd_induced_target(A, b, Vector(d), eta);
    const Vector pred = matvec(A, step.x_next);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(out.context[k].b - b[k], pred[k], 1e-12);
      EXPECT_EQ(out.context[k].a, tokens.context[k].a);
    }
    EXPECT_NEAR(out.query.b, numkit::dot(q, step.x_next), 1e-12);
  }
}

TEST(Attention, ScoresAreRowStochastic) {
  numkit::RngStream rng(6, 0);
  TokenSet tokens;
  for (int k = 0; k < 9; ++k) tokens.context.push_back({rng.normal_vector(3), rng.normal()});
  tokens.query = {rng.normal_vector(3), 0.0};
  AttentionWeights w{3.0 * rng.normal_matrix(4, 4), rng.normal_matrix(4, 4),
                     rng.normal_matrix(4, 4), Matrix::identity(4)};
  const Matrix s = attention_scores(tokens, w);
  ASSERT_EQ(s.rows(), 10u);
  ASSERT_EQ(s.cols(), 9u);
  for (std::size_t j = 0; j < s.rows(); ++j) {
    double total = 0.0;
    for (std::size_t k = 0; k < s.cols(); ++k) {
      EXPECT_GE(s(j, k), 0.0);
      total += s(j, k);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const TokenSet out = attention_step_softmax(tokens, w);
  for (std::size_t k = 0; k < tokens.context.size(); ++k) {
    EXPECT_EQ(out.context[k].a, tokens.context[k].a);
  }
}

TEST(Attention, SingleContextTokenScoresOne) {
  TokenSet tokens;
  tokens.context.push_back({Vector{1, 2}, 3});
  tokens.query = {Vector{0, 1}, 0};
  const auto w = construct_gd_weights(2, 1.0);
  const Matrix s = attention_scores(tokens, w);
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_EQ(s(1, 0), 1.0);
  // With one token the softmax layer adds W_V e_1 to every b-channel.
  const TokenSet out = attention_step_softmax(tokens, w);
  EXPECT_EQ(out.context[0].b, 6.0);
  EXPECT_EQ(out.query.b, 3.0);
}

TEST(Attention, DataShiftWithZeroValueIsIdentity) {
  TokenSet tokens;
  tokens.context = {{Vector{1, 2}, 0.5}, {Vector{-1, 0}, 0.5}};
  tokens.query = {Vector{0, 0}, 0};
  AttentionWeights w = construct_gd_weights(2, 0.0);
  EXPECT_EQ(attention_data_shift(tokens, w), (Matrix{{1, 2}, {-1, 0}}));
  w.W_V = 0.1 * Matrix::identity(3);
  const Matrix shifted = attention_data_shift(tokens, w);
  EXPECT_NE(shifted, (Matrix{{1, 2}, {-1, 0}}));
}

TEST(Attention, ShapeChecks) {
  TokenSet tokens;
  tokens.context = {{Vector{1, 2}, 0.5}, {Vector{1}, 0.5}};
  tokens.query = {Vector{0, 0}, 0};
  EXPECT_THROW(tokens.validate(), DimensionMismatch);
  tokens.context.pop_back();
  EXPECT_THROW(attention_step_linear(tokens, construct_gd_weights(3, 0.1)), DimensionMismatch);
  EXPECT_EQ(embed(tokens.context[0]), (Vector{1, 2, 0.5}));
  EXPECT_EQ(tokens.b_channels(), (Vector{0.5, 0}));
}

TEST(Compare, Metrics) {
  const std::vector<Vector> a{Vector{1, 2}, Vector{0, 3}};
  const auto same = compare_transforms(a, a);
  for (const auto& m : same.steps) {
    EXPECT_EQ(m.distance, 0.0);
    EXPECT_DOUBLE_EQ(m.cosine, 1.0);
    EXPECT_EQ(m.norm_ratio, 1.0);
  }
  const std::vector<Vector> neg{Vector{-1, -2}, Vector{0, -3}};
  const auto opposite = compare_transforms(a, neg);
  EXPECT_DOUBLE_EQ(opposite.max_cosine, -1.0);
  EXPECT_DOUBLE_EQ(opposite.mean_distance, (2 * std::sqrt(5.0) + 6) / 2);
  EXPECT_THROW(compare_transforms(a, {Vector{1, 2}}), DimensionMismatch);
  EXPECT_THROW(compare_transforms({Vector{1}}, {Vector{1, 2}}), DimensionMismatch);
  const auto zero = compare_step(Vector{0, 0}, Vector{0, 0});
  EXPECT_EQ(zero.norm_ratio, 1.0);
  EXPECT_EQ(zero.cosine, 0.0);
  EXPECT_TRUE(std::isinf(compare_step(Vector{0}, Vector{1}).norm_ratio));
  EXPECT_TRUE(compare_transforms({}, {}).steps.empty());
}

TEST(Trajectory, LinearIclMatchesGd) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto task = sample_linear_task(seed, 4 + seed % 20, 1 + seed % 8);
    GDConfig cfg;
    cfg.eta = 0.05;
    cfg.steps = 20;
    const auto steps = run_linear_icl(task, cfg);
    ASSERT_EQ(steps.size(), 20u);
    double prev = INFINITY;
    for (const auto& s : steps) {
      EXPECT_LE(s.metrics.distance, 1e-9);
      EXPECT_LE(s.loss, prev + 1e-12);
      prev = s.loss;
      ASSERT_TRUE(s.log_bound.has_value());
      EXPECT_LE(std::log(s.delta_b_norm), *s.log_bound + 1e-12);
    }
  }
}

TEST(Trajectory, SoftmaxIclStaysUnderCertificates) {
  for (int i = 0; i < 10; ++i) {
    Vector x0;
    const auto inst = sampled_instance(i, &x0);
    GDConfig cfg;
    cfg.steps = 10;
    const auto steps = run_softmax_icl(inst, x0, cfg);
    ASSERT_EQ(steps.size(), 10u);
    for (const auto& s : steps) {
      ASSERT_TRUE(s.delta_b_data_norm.has_value());
      if (s.log_bound) EXPECT_LE(std::log(s.delta_b_norm), *s.log_bound);
      if (s.log_bound_data) EXPECT_LE(std::log(*s.delta_b_data_norm), *s.log_bound_data);
      if (!s.log_bound || !s.log_bound_data) EXPECT_TRUE(s.hypothesis_note.has_value());
      EXPECT_EQ(s.b_tilde.size(), inst.n());
    }
  }
}

TEST(Trajectory, JsonLayout) {
  GDConfig cfg;
  cfg.steps = 3;
  const auto steps = run_linear_icl(sample_linear_task(1, 5, 2), cfg);
  const auto j = nlohmann::json::parse(trajectory_to_json(steps));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 3u);
  for (const char* key : {"step", "x", "loss", "b_tilde", "delta_b_norm", "log_bound", "metrics"}) {
    EXPECT_TRUE(j[0].contains(key)) << key;
  }
  EXPECT_EQ(j[2]["step"], 3);
  EXPECT_TRUE(j[0]["metrics"].contains("cosine"));
  EXPECT_FALSE(j[0].contains("delta_b_data_norm"));
}
