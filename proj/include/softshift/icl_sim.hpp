#pragma once
// In-context learning view: gradient-descent trajectories on softmax
// regression, the induced target b~ = b - delta_b, and single self-attention
// layer updates, with the linear-regression equivalence between one GD step
// and one linear attention step.

#include <optional>
#include <string>
#include <vector>

#include "softshift/numkit/linalg.hpp"
#include "softshift/shift_analysis.hpp"
#include "softshift/softmax_core.hpp"

namespace softshift::icl {

using numkit::Matrix;
using numkit::Vector;

enum class StepSign {
  descent,     // x - eta g
  paper_plus,  // x + eta g, the literal update rule (ascends the loss)
};

const char* to_string(StepSign sign);

struct GDConfig {
  double eta = 0.001;
  int steps = 50;
  StepSign sign = StepSign::descent;
  // Halve eta until loss(new) <= loss(old) + 1e-12, down to 2^-40 eta.
  bool backtracking = false;

  void validate() const;
};

inline constexpr double kBacktrackTol = 1e-12;
inline constexpr int kBacktrackHalvings = 40;

// One step on the softmax regression loss of `instance`.
Vector gd_step(const Instance& instance, const Vector& x, const GDConfig& config);

// b~ = b - delta_b, the target for which the old iterate reproduces the new
// residual norm: ||f(x_next) - b|| = ||f(x_t) - b~||. Validates the pair.
Vector induced_target(const Instance& instance, const Vector& x_t, const Vector& x_next);

struct LinearStep {
  Vector x_next;
  Vector b_tilde;
};

// One GD step on 0.5 ||Ax - b||^2: dx = -eta A^T (Ax - b), b~ = b - A dx.
LinearStep linear_gd_induced_target(const Matrix& A, const Vector& b, const Vector& x,
                                    double eta);

struct Token {
  Vector a;
  double b = 0.0;
};

// Context tokens e_j = (a_j, b_j) and a query token. Tokens are embedded as
// (a, b) in R^{d+1}; the target lives in the last channel.
struct TokenSet {
  std::vector<Token> context;
  Token query;

  std::size_t d() const;
  // Throws DimensionMismatch if the tokens disagree on d.
  void validate() const;
  // b-channels of the context tokens followed by the query.
  Vector b_channels() const;
};

Vector embed(const Token& t);

struct AttentionWeights {
  Matrix W_Q;
  Matrix W_K;
  Matrix W_V;
  Matrix P;
};

// For every token j (context and query):
//   b^_j = b_j + [P sum_k (W_V e_k)(W_K e_k)^T (W_Q e_j)]_b
// with k over the context tokens. a-channels are unchanged.
TokenSet attention_step_linear(const TokenSet& tokens, const AttentionWeights& w);

// Row-normalized scores exp(<W_Q e_j, W_K e_k>) for every token j (context
// rows, then the query) against the context tokens k.
Matrix attention_scores(const TokenSet& tokens, const AttentionWeights& w);

// b^_j = b_j + [P sum_k score_jk W_V e_k]_b. a-channels are unchanged.
TokenSet attention_step_softmax(const TokenSet& tokens, const AttentionWeights& w);

// The full-token softmax update e_j + P sum_k score_jk W_V e_k restricted to
// the a-channels of the context tokens: the tokenized document after one
// attention layer, used as A_next for data shifts.
Matrix attention_data_shift(const TokenSet& tokens, const AttentionWeights& w);

// W_Q = W_K = a-channel selector, W_V = eta * b-channel selector, P = I.
// One linear attention step then adds eta sum_k b_k <a_k, a_j> to every
// b-channel, which is the prediction shift of one GD step from x = 0.
AttentionWeights construct_gd_weights(std::size_t d, double eta);

struct StepMetrics {
  double distance = 0.0;
  double cosine = 0.0;      // 0 when either vector is zero
  double norm_ratio = 0.0;  // ||b|| / ||a||; 1 when both are zero, inf when only a is
};

struct TransformMetrics {
  std::vector<StepMetrics> steps;
  double mean_distance = 0.0;
  double max_distance = 0.0;
  double mean_cosine = 0.0;
  double max_cosine = 0.0;
  double mean_norm_ratio = 0.0;
  double max_norm_ratio = 0.0;
};

StepMetrics compare_step(const Vector& a, const Vector& b);
TransformMetrics compare_transforms(const std::vector<Vector>& run_a,
                                    const std::vector<Vector>& run_b);

// --- Trajectories ---------------------------------------------------------

struct TrajectoryStep {
  int step = 0;
  Vector x;  // iterate after the step
  double loss = 0.0;
  Vector b_tilde;
  double delta_b_norm = 0.0;
  // log-space bound on delta_b_norm; empty when the step leaves the
  // hypothesis region.
  std::optional<double> log_bound;
  StepMetrics metrics;
  // Softmax task only: the data shift produced by the attention layer.
  std::optional<double> delta_b_data_norm;
  std::optional<double> log_bound_data;
  std::optional<std::string> hypothesis_note;
};

struct LinearTask {
  Matrix A;  // context inputs, one row per context token
  Vector b;
  Vector query;
};

// Random linear task: a_k ~ N(0, I/d), b_k = <a_k, w*> with w* ~ N(0, I).
LinearTask sample_linear_task(std::uint64_t seed, std::size_t n, std::size_t d);

// GD on the linear task from x = 0. At each step the attention layer from
// construct_gd_weights(d, eta) runs on tokens whose context targets are the
// current residuals b - A x_t; metrics compare its b-channel shifts with the
// GD prediction shifts [A; a_q] dx over all tokens.
std::vector<TrajectoryStep> run_linear_icl(const LinearTask& task, const GDConfig& config);

// GD on a softmax regression instance. Each step reports the weight-shift
// delta_b and its bound, and compares it with the delta_b caused by the data
// shift A -> attention_data_shift(tokens(A, b)) at the current x, where the
// layer uses W_Q = W_K = a-selector, W_V = eta I, P = I.
std::vector<TrajectoryStep> run_softmax_icl(const Instance& instance, const Vector& x0,
                                            const GDConfig& config);

// JSON array of {step, x, loss, b_tilde, delta_b_norm, log_bound, metrics}.
std::string trajectory_to_json(const std::vector<TrajectoryStep>& steps, int indent = 2);

}  // namespace softshift::icl
