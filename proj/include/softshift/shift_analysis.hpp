#pragma once
// Exact induced target shift delta_b and the Lipschitz bound chain that
// controls it, for weight shifts (x_t -> x_next) and data shifts
// (A_t -> A_next).
//
// Every bound is returned as a natural logarithm. The theorem constant
// M = n^1.5 exp(10 R^2) is already exp(160) at R = 4, so comparisons are only
// meaningful in log space. A zero quantity has log -infinity.

#include <optional>
#include <string>
#include <utility>

#include "softshift/softmax_core.hpp"

namespace softshift::shift {

enum class ShiftKind { weight, data };

const char* to_string(ShiftKind kind);

// A pair of iterates. For a weight shift A_t == A_next; for a data shift
// x_t == x_next. Storing both sides uniformly lets every quantity be written
// as g(A_next, x_next) - g(A_t, x_t).
class ShiftPair {
 public:
  static ShiftPair weight(Matrix A, Vector b, Vector x_t, Vector x_next, double R);
  static ShiftPair data(Matrix A_t, Matrix A_next, Vector b, Vector x, double R);

  ShiftKind kind() const noexcept { return kind_; }
  const Matrix& A_t() const noexcept { return A_t_; }
  const Matrix& A_next() const noexcept { return A_next_; }
  const Vector& x_t() const noexcept { return x_t_; }
  const Vector& x_next() const noexcept { return x_next_; }
  const Vector& b() const noexcept { return b_; }
  double R() const noexcept { return R_; }
  std::size_t n() const noexcept { return A_t_.rows(); }
  std::size_t d() const noexcept { return A_t_.cols(); }

  // ||x_next - x_t||_2 for weight shifts, spectral ||A_next - A_t|| for data
  // shifts.
  double shift_norm() const;

  // The same pair with current and next iterates exchanged.
  ShiftPair swapped() const;

  // Reason the pair invariants fail, or nullopt if they all hold.
  std::optional<std::string> violation() const;
  // Throws PreconditionViolation with the reason from violation().
  void validate() const;

 private:
  ShiftPair(ShiftKind kind, Matrix A_t, Matrix A_next, Vector b, Vector x_t, Vector x_next,
            double R);

  ShiftKind kind_;
  Matrix A_t_;
  Matrix A_next_;
  Vector b_;
  Vector x_t_;
  Vector x_next_;
  double R_;
};

// The infinity-norm step cap from the theorem hypotheses: ||A dx||_inf < 0.01
// (or ||dA x||_inf < 0.01).
inline constexpr double kStepCap = 0.01;

struct BoundContext {
  std::size_t n = 1;
  double R = 4.0;
  double log_beta = -16.0;  // lower bound on log alpha at both iterates

  // beta at its analytic floor exp(-R^2).
  static BoundContext floor(std::size_t n, double R);
  // beta = min(alpha_t, alpha_next), the tightest valid choice for this pair.
  static BoundContext empirical(const ShiftPair& pair);
};

struct Certificate {
  double log_M = 0.0;
};

// Per-bound outcome flags of a ShiftReport.
struct BoundFlags {
  bool exp = true;
  bool alpha = true;
  bool alpha_inv = true;
  bool db1 = true;
  bool db2 = true;
  bool db = true;
  bool db1_statement = true;
  bool db2_statement = true;
  bool certificate = true;
  bool chain = true;  // log_bound_db <= log_certificate
};

struct ShiftReport {
  ShiftKind kind = ShiftKind::weight;
  Vector delta_b;
  Vector delta_b1;
  Vector delta_b2;
  double shift_norm = 0.0;

  // Natural logs of the measured quantities.
  double log_actual = 0.0;            // ||delta_b||_2
  double log_actual_exp = 0.0;        // ||exp(next) - exp(current)||_2
  double log_actual_alpha = 0.0;      // |alpha_next - alpha_t|
  double log_actual_alpha_inv = 0.0;  // |1/alpha_next - 1/alpha_t|
  double log_actual_db1 = 0.0;
  double log_actual_db2 = 0.0;
  double log_alpha_t = 0.0;
  double log_alpha_next = 0.0;

  // Log-space bounds. The alpha and alpha_inv bounds are evaluated at the
  // measured input of their lemma (||delta exp|| and |delta alpha|), so each
  // Lipschitz step is checked on its own.
  double log_bound_exp = 0.0;
  double log_bound_alpha = 0.0;
  double log_bound_alpha_inv = 0.0;
  double log_bound_db1 = 0.0;
  double log_bound_db2 = 0.0;
  double log_bound_db = 0.0;
  // Constants as written in the lemma statement (part 1 without the factor R,
  // part 2 with exp(R^2)); informational only.
  double log_bound_db1_statement = 0.0;
  double log_bound_db2_statement = 0.0;

  double log_certificate = 0.0;  // log M + ln(shift_norm)
  double slack_log = 0.0;        // log_bound_db - log_actual
  BoundFlags satisfied;

  bool all_satisfied() const;
};

// log of a nonnegative quantity; -inf at 0.
double safe_log(double v);

// log_bound - log_actual, or +inf when the actual quantity is exactly zero.
double log_slack(double log_bound, double log_actual);

// f(next) - f(current). Validates the pair.
Vector delta_b_exact(const ShiftPair& pair);

// (delta_b1, delta_b2) with delta_b1 = (1/alpha_next - 1/alpha_t) exp(next)
// and delta_b2 = (exp(next) - exp(current)) / alpha_t.
std::pair<Vector, Vector> delta_b_split(const ShiftPair& pair);

// log beta = -R^2.
double beta_floor(double R);

double bound_exp_shift(const ShiftPair& pair, const BoundContext& ctx);
double bound_alpha_shift(double delta_exp_norm, std::size_t n);
double bound_alpha_inv_shift(double delta_alpha, const BoundContext& ctx);
// (part 1, part 2) log-bounds on ||delta_b1||, ||delta_b2||, with the
// constants carried through the proofs (factor R in part 1, exp(2R^2) in
// part 2).
std::pair<double, double> bound_delta_b_parts(const ShiftPair& pair, const BoundContext& ctx);
// Statement-side constants of the same two bounds.
std::pair<double, double> bound_delta_b_parts_statement(const ShiftPair& pair,
                                                        const BoundContext& ctx);
double bound_delta_b(const ShiftPair& pair, const BoundContext& ctx);

// log M = 10 R^2 + 1.5 ln n. Throws PreconditionViolation when R < 4 or n < 1.
Certificate certificate_logM(std::size_t n, double R);

// Full report without the theorem's R >= 4 requirement. log_certificate is
// still filled in from the formula. Validates the pair and the context
// (log_beta must not exceed log alpha at either iterate).
ShiftReport analyze_shift(const ShiftPair& pair, const BoundContext& ctx);

// analyze_shift under the full theorem hypotheses (adds R >= 4).
ShiftReport check_theorem(const ShiftPair& pair, const BoundContext& ctx);

}  // namespace softshift::shift
