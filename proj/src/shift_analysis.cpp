#include "softshift/shift_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "softshift/errors.hpp"

namespace softshift::shift {

using namespace numkit;

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Everything is expressed through f_t and dz = z_next - z_t (z = Ax), so no
// exp(Ax) is ever formed and small differences keep full relative accuracy.
struct Evaluation {
  Vector f_t;
  Vector f_next;
  Vector rel_exp;  // (exp_next - exp_t) / alpha_t = f_t o expm1(dz)
  double q = 0.0;  // (alpha_next - alpha_t) / alpha_t
  double log_alpha_t = 0.0;
  double log_alpha_next = 0.0;
  Vector delta_b;
};

Vector logit_shift(const ShiftPair& pair) {
  if (pair.kind() == ShiftKind::weight) return matvec(pair.A_t(), pair.x_next() - pair.x_t());
  return matvec(pair.A_next() - pair.A_t(), pair.x_t());
}

Evaluation evaluate(const ShiftPair& pair) {
  Evaluation ev;
  const Vector dz = logit_shift(pair);
  ev.f_t = predict(pair.A_t(), pair.x_t());
  ev.log_alpha_t = log_alpha(pair.A_t(), pair.x_t());
  const std::size_t n = dz.size();
  ev.rel_exp = Vector(n);
  for (std::size_t i = 0; i < n; ++i) ev.rel_exp[i] = ev.f_t[i] * std::expm1(dz[i]);
  ev.q = sum(ev.rel_exp);
  const double log1p_q = std::log1p(ev.q);
  ev.log_alpha_next = ev.log_alpha_t + log1p_q;
  ev.delta_b = Vector(n);
  for (std::size_t i = 0; i < n; ++i) ev.delta_b[i] = ev.f_t[i] * std::expm1(dz[i] - log1p_q);
  ev.f_next = ev.f_t + ev.delta_b;
  return ev;
}

// delta_b1 = (1/alpha_next - 1/alpha_t) exp_next = -q f_next,
// delta_b2 = (exp_next - exp_t) / alpha_t.
std::pair<Vector, Vector> split_from(const Evaluation& ev) {
  return {-ev.q * ev.f_next, ev.rel_exp};
}

Vector delta_b_unchecked(const ShiftPair& pair) { return evaluate(pair).delta_b; }

void validate_context(const ShiftPair& pair, const BoundContext& ctx) {
  if (ctx.n != pair.n()) {
    throw PreconditionViolation("BoundContext: n = " + std::to_string(ctx.n) +
                                " but the pair has n = " + std::to_string(pair.n()));
  }
  if (!(ctx.R >= pair.R())) {
    throw PreconditionViolation("BoundContext: R = " + fmt(ctx.R) + " is below the pair radius " +
                                fmt(pair.R()));
  }
  if (!std::isfinite(ctx.log_beta)) throw PreconditionViolation("BoundContext: log_beta not finite");
}

// Terms common to every bound that scales with the shift: ln R + ln s.
double log_R_shift(const ShiftPair& pair, const BoundContext& ctx) {
  return std::log(ctx.R) + safe_log(pair.shift_norm());
}

}  // namespace

const char* to_string(ShiftKind kind) { return kind == ShiftKind::weight ? "x" : "A"; }

ShiftPair::ShiftPair(ShiftKind kind, Matrix A_t, Matrix A_next, Vector b, Vector x_t,
                     Vector x_next, double R)
    : kind_(kind),
      A_t_(std::move(A_t)),
      A_next_(std::move(A_next)),
      b_(std::move(b)),
      x_t_(std::move(x_t)),
      x_next_(std::move(x_next)),
      R_(R) {
  if (A_t_.rows() == 0 || A_t_.cols() == 0) throw DimensionMismatch("ShiftPair: empty A");
  if (A_next_.rows() != A_t_.rows() || A_next_.cols() != A_t_.cols()) {
    throw DimensionMismatch("ShiftPair: A_t and A_next differ in shape");
  }
  if (b_.size() != A_t_.rows()) throw DimensionMismatch("ShiftPair: b length differs from n");
  if (x_t_.size() != A_t_.cols() || x_next_.size() != A_t_.cols()) {
    throw DimensionMismatch("ShiftPair: x length differs from d");
  }
}

ShiftPair ShiftPair::weight(Matrix A, Vector b, Vector x_t, Vector x_next, double R) {
  Matrix copy = A;
  return ShiftPair(ShiftKind::weight, std::move(A), std::move(copy), std::move(b), std::move(x_t),
                   std::move(x_next), R);
}

ShiftPair ShiftPair::data(Matrix A_t, Matrix A_next, Vector b, Vector x, double R) {
  Vector copy = x;
  return ShiftPair(ShiftKind::data, std::move(A_t), std::move(A_next), std::move(b), std::move(x),
                   std::move(copy), R);
}

double ShiftPair::shift_norm() const {
  if (kind_ == ShiftKind::weight) return l2_norm(x_next_ - x_t_);
  return spectral_norm(A_next_ - A_t_);
}

ShiftPair ShiftPair::swapped() const {
  return ShiftPair(kind_, A_next_, A_t_, b_, x_next_, x_t_, R_);
}

std::optional<std::string> ShiftPair::violation() const {
  if (!(R_ > 0.0) || !std::isfinite(R_)) return "R must be a positive finite number";
  if (!all_finite(A_t_) || !all_finite(A_next_) || !all_finite(b_) || !all_finite(x_t_) ||
      !all_finite(x_next_)) {
    return "non-finite entry";
  }
  const double cap = R_ * (1.0 + kNormSlack);
  const double norm_t = spectral_norm(A_t_);
  if (norm_t > cap) return "||A_t|| = " + fmt(norm_t) + " exceeds R = " + fmt(R_);
  if (kind_ == ShiftKind::data) {
    const double norm_next = spectral_norm(A_next_);
    if (norm_next > cap) return "||A_next|| = " + fmt(norm_next) + " exceeds R = " + fmt(R_);
  }
  const double nx_t = l2_norm(x_t_);
  if (nx_t > cap) return "||x_t||_2 = " + fmt(nx_t) + " exceeds R = " + fmt(R_);
  const double nx_next = l2_norm(x_next_);
  if (nx_next > cap) return "||x_next||_2 = " + fmt(nx_next) + " exceeds R = " + fmt(R_);

  const double step = linf_norm(matvec(A_next_, x_next_) - matvec(A_t_, x_t_));
  if (!(step < kStepCap)) {
    return std::string(kind_ == ShiftKind::weight ? "||A(x_next - x_t)||_inf"
                                                  : "||(A_next - A_t)x||_inf") +
           " = " + fmt(step) + " is not below 0.01";
  }
  return std::nullopt;
}

void ShiftPair::validate() const {
  if (auto why = violation()) throw PreconditionViolation("ShiftPair: " + *why);
}

BoundContext BoundContext::floor(std::size_t n, double R) { return {n, R, beta_floor(R)}; }

BoundContext BoundContext::empirical(const ShiftPair& pair) {
  const double lb = std::min(log_alpha(pair.A_t(), pair.x_t()),
                             log_alpha(pair.A_next(), pair.x_next()));
  return {pair.n(), pair.R(), lb};
}

bool ShiftReport::all_satisfied() const {
  const auto& s = satisfied;
  return s.exp && s.alpha && s.alpha_inv && s.db1 && s.db2 && s.db && s.certificate && s.chain;
}

double log_slack(double log_bound, double log_actual) {
  if (log_actual == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  return log_bound - log_actual;
}

double safe_log(double v) {
  if (v == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(v);
}

Vector delta_b_exact(const ShiftPair& pair) {
  pair.validate();
  return delta_b_unchecked(pair);
}

std::pair<Vector, Vector> delta_b_split(const ShiftPair& pair) {
  pair.validate();
  return split_from(evaluate(pair));
}

double beta_floor(double R) { return -R * R; }

double bound_exp_shift(const ShiftPair& pair, const BoundContext& ctx) {
  return kLn2 + 0.5 * std::log(static_cast<double>(ctx.n)) + ctx.R * ctx.R +
         log_R_shift(pair, ctx);
}

double bound_alpha_shift(double delta_exp_norm, std::size_t n) {
  return safe_log(delta_exp_norm) + 0.5 * std::log(static_cast<double>(n));
}

double bound_alpha_inv_shift(double delta_alpha, const BoundContext& ctx) {
  return -2.0 * ctx.log_beta + safe_log(delta_alpha);
}

std::pair<double, double> bound_delta_b_parts(const ShiftPair& pair, const BoundContext& ctx) {
  const double ln_n = std::log(static_cast<double>(ctx.n));
  const double base = kLn2 + 2.0 * ctx.R * ctx.R + log_R_shift(pair, ctx);
  return {base - 2.0 * ctx.log_beta + 1.5 * ln_n, base - ctx.log_beta + 0.5 * ln_n};
}

std::pair<double, double> bound_delta_b_parts_statement(const ShiftPair& pair,
                                                        const BoundContext& ctx) {
  const double ln_n = std::log(static_cast<double>(ctx.n));
  const double ln_s = safe_log(pair.shift_norm());
  const double part1 = kLn2 - 2.0 * ctx.log_beta + 1.5 * ln_n + 2.0 * ctx.R * ctx.R + ln_s;
  const double part2 =
      kLn2 - ctx.log_beta + 0.5 * ln_n + std::log(ctx.R) + ctx.R * ctx.R + ln_s;
  return {part1, part2};
}

double bound_delta_b(const ShiftPair& pair, const BoundContext& ctx) {
  return 2.0 * kLn2 - 2.0 * ctx.log_beta + 1.5 * std::log(static_cast<double>(ctx.n)) +
         2.0 * ctx.R * ctx.R + log_R_shift(pair, ctx);
}

Certificate certificate_logM(std::size_t n, double R) {
  if (n < 1) throw PreconditionViolation("certificate_logM: n must be at least 1");
  if (!(R >= 4.0)) throw PreconditionViolation("certificate_logM: R >= 4 required, got " + fmt(R));
  return {10.0 * R * R + 1.5 * std::log(static_cast<double>(n))};
}

ShiftReport analyze_shift(const ShiftPair& pair, const BoundContext& ctx) {
  pair.validate();
  validate_context(pair, ctx);

  const Evaluation ev = evaluate(pair);
  ShiftReport r;
  r.kind = pair.kind();
  r.log_alpha_t = ev.log_alpha_t;
  r.log_alpha_next = log_alpha(pair.A_next(), pair.x_next());
  if (ctx.log_beta > std::min(r.log_alpha_t, r.log_alpha_next)) {
    throw PreconditionViolation("BoundContext: log_beta = " + fmt(ctx.log_beta) +
                                " exceeds log alpha at an iterate");
  }

  r.delta_b = ev.delta_b;
  std::tie(r.delta_b1, r.delta_b2) = split_from(ev);
  r.shift_norm = pair.shift_norm();

  const double log_q = safe_log(std::fabs(ev.q));
  r.log_actual = safe_log(l2_norm(r.delta_b));
  r.log_actual_exp = ev.log_alpha_t + safe_log(l2_norm(ev.rel_exp));
  r.log_actual_alpha = ev.log_alpha_t + log_q;
  r.log_actual_alpha_inv = log_q - ev.log_alpha_next;
  r.log_actual_db1 = safe_log(l2_norm(r.delta_b1));
  r.log_actual_db2 = safe_log(l2_norm(r.delta_b2));

  r.log_bound_exp = bound_exp_shift(pair, ctx);
  r.log_bound_alpha = r.log_actual_exp + 0.5 * std::log(static_cast<double>(ctx.n));
  r.log_bound_alpha_inv = -2.0 * ctx.log_beta + r.log_actual_alpha;
  std::tie(r.log_bound_db1, r.log_bound_db2) = bound_delta_b_parts(pair, ctx);
  std::tie(r.log_bound_db1_statement, r.log_bound_db2_statement) =
      bound_delta_b_parts_statement(pair, ctx);
  r.log_bound_db = bound_delta_b(pair, ctx);
  r.log_certificate = 10.0 * ctx.R * ctx.R + 1.5 * std::log(static_cast<double>(ctx.n)) +
                      safe_log(r.shift_norm);
  r.slack_log = log_slack(r.log_bound_db, r.log_actual);

  auto& s = r.satisfied;
  s.exp = r.log_actual_exp <= r.log_bound_exp;
  s.alpha = r.log_actual_alpha <= r.log_bound_alpha;
  s.alpha_inv = r.log_actual_alpha_inv <= r.log_bound_alpha_inv;
  s.db1 = r.log_actual_db1 <= r.log_bound_db1;
  s.db2 = r.log_actual_db2 <= r.log_bound_db2;
  s.db = r.log_actual <= r.log_bound_db;
  s.db1_statement = r.log_actual_db1 <= r.log_bound_db1_statement;
  s.db2_statement = r.log_actual_db2 <= r.log_bound_db2_statement;
  s.certificate = r.log_actual <= r.log_certificate;
  s.chain = r.log_bound_db <= r.log_certificate;
  return r;
}

ShiftReport check_theorem(const ShiftPair& pair, const BoundContext& ctx) {
  if (!(pair.R() >= 4.0) || !(ctx.R >= 4.0)) {
    throw PreconditionViolation("check_theorem: R >= 4 required, got " + fmt(pair.R()));
  }
  return analyze_shift(pair, ctx);
}

}  // namespace softshift::shift
