#include "softshift/harness/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "softshift/errors.hpp"
#include "softshift/harness/oracles.hpp"
#include "softshift/harness/sampler.hpp"
#include "softshift/softmax_core.hpp"

namespace softshift::harness {

using namespace numkit;
using shift::safe_log;

namespace {

Check make_check(std::string name, double log_actual, double log_bound) {
  return {std::move(name), log_actual, log_bound, log_actual <= log_bound};
}

void set_primary(TrialRecord& rec, std::string_view name) {
  const Check* c = rec.find(name);
  rec.log_actual = c->log_actual;
  rec.slack_log = shift::log_slack(c->log_bound, c->log_actual);
}

// Relative error of `got` against `want`, measured against the larger of the
// two norms (zero when both vanish).
double relative_error(const Vector& got, const Vector& want) {
  const double scale = std::max(l2_norm(got), l2_norm(want));
  if (scale == 0.0) return 0.0;
  return l2_norm(got - want) / scale;
}

void fill_shape(TrialRecord& rec, const shift::ShiftPair& pair) {
  rec.n = static_cast<int>(pair.n());
  rec.d = static_cast<int>(pair.d());
  rec.R = pair.R();
}

void gradient_trial(const SampleConfig& config, std::int64_t index, TrialRecord& rec) {
  SampleConfig c = config;
  c.kind = shift::ShiftKind::weight;
  const auto pair = sample_instance(c, index);
  fill_shape(rec, pair);
  const Vector g = gradient(pair.A_t(), pair.x_t(), pair.b());
  const Vector fd = fd_gradient(pair.A_t(), pair.b(), pair.x_t(), config.fd_step);
  double worst_ratio = 0.0;
  double rel_err = 0.0;
  double abs_err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double err = std::fabs(g[i] - fd[i]);
    const double allowed = std::max(kGradRelTol * std::fabs(g[i]), kGradAbsTol);
    worst_ratio = std::max(worst_ratio, err / allowed);
    // Scaled so that rel_err <= kGradRelTol exactly when the check passes.
    rel_err = std::max(rel_err, err / std::max(std::fabs(g[i]), kGradAbsTol / kGradRelTol));
    abs_err = std::max(abs_err, err);
  }
  rec.shift_norm = 0.0;
  rec.checks.push_back(make_check("gradient", safe_log(worst_ratio), 0.0));
  rec.metrics = {{"rel_err", rel_err}, {"abs_err", abs_err}};
  set_primary(rec, "gradient");
}

void facts_trial(const SampleConfig& config, std::int64_t index, TrialRecord& rec) {
  RngStream rng(config.master_seed, static_cast<std::uint64_t>(index));
  const auto n = static_cast<std::size_t>(rng.uniform_int(config.n_range.lo, config.n_range.hi));
  const double scale = rng.uniform(0.1, 4.0);
  const Vector x = scale * rng.normal_vector(n);
  const Vector y = rng.normal_vector(n);
  Vector z = x;
  for (auto& v : z) v += shift::kStepCap * rng.uniform(-1.0, 1.0);
  const Vector dxz = x - z;

  rec.n = static_cast<int>(n);
  rec.d = 0;
  rec.R = 0.0;
  rec.shift_norm = linf_norm(dxz);

  const double lx2 = safe_log(l2_norm(x));
  const double lxinf = safe_log(linf_norm(x));
  const double half_ln_n = 0.5 * std::log(static_cast<double>(n));
  const Vector ex = exp_elementwise(x);
  rec.checks.push_back(
      make_check("hadamard", safe_log(l2_norm(hadamard(x, y))), lxinf + safe_log(l2_norm(y))));
  rec.checks.push_back(make_check("linf_le_l2", lxinf, lx2));
  rec.checks.push_back(make_check("l2_le_sqrtn_linf", lx2, half_ln_n + lxinf));
  rec.checks.push_back(make_check("exp_linf", safe_log(linf_norm(ex)), l2_norm(x)));
  rec.checks.push_back(make_check("exp_perturbation",
                                  safe_log(l2_norm(ex - exp_elementwise(z))),
                                  safe_log(l2_norm(ex)) + std::numbers::ln2 +
                                      safe_log(linf_norm(dxz))));
  set_primary(rec, "exp_perturbation");
}

shift::BoundContext context_for(const SampleConfig& config, const shift::ShiftPair& pair) {
  return config.beta_mode == BetaMode::floor ? shift::BoundContext::floor(pair.n(), pair.R())
                                             : shift::BoundContext::empirical(pair);
}

void lemma_trial(const SampleConfig& config, std::int64_t index, TrialRecord& rec) {
  const auto pair = sample_instance(config, index);
  fill_shape(rec, pair);
  const auto r = shift::check_theorem(pair, context_for(config, pair));
  rec.shift_norm = r.shift_norm;
  rec.checks.push_back(make_check("exp", r.log_actual_exp, r.log_bound_exp));
  rec.checks.push_back(make_check("alpha", r.log_actual_alpha, r.log_bound_alpha));
  rec.checks.push_back(make_check("alpha_inv", r.log_actual_alpha_inv, r.log_bound_alpha_inv));
  rec.checks.push_back(make_check("db1", r.log_actual_db1, r.log_bound_db1));
  rec.checks.push_back(make_check("db2", r.log_actual_db2, r.log_bound_db2));
  rec.checks.push_back(make_check("db", r.log_actual, r.log_bound_db));
  rec.checks.push_back(make_check("db1_statement", r.log_actual_db1, r.log_bound_db1_statement));
  rec.checks.push_back(make_check("db2_statement", r.log_actual_db2, r.log_bound_db2_statement));

  // Split error relative to the largest of ||delta_b||, ||delta_b1||, ||delta_b2||.
  const Vector split_sum = r.delta_b1 + r.delta_b2;
  const double split_scale =
      std::max({l2_norm(r.delta_b), l2_norm(r.delta_b1), l2_norm(r.delta_b2)});
  const double split_err = split_scale == 0.0 ? 0.0 : l2_norm(split_sum - r.delta_b) / split_scale;
  const double split_err_db = relative_error(split_sum, r.delta_b);
  const Vector f_next = predict(pair.A_next(), pair.x_next());
  const Vector f_t = predict(pair.A_t(), pair.x_t());
  const double lhs = l2_norm(f_next - pair.b());
  const double rhs = l2_norm(f_t - pair.b() + r.delta_b);
  const double identity_err = lhs == 0.0 && rhs == 0.0 ? 0.0 : std::fabs(lhs - rhs) / lhs;
  rec.checks.push_back(
      make_check("split_identity", safe_log(split_err), std::log(kIdentityRelTol)));
  rec.checks.push_back(
      make_check("defining_identity", safe_log(identity_err), std::log(kIdentityRelTol)));
  rec.metrics = {{"split_rel_err", split_err},
                 {"split_rel_err_db", split_err_db},
                 {"identity_rel_err", identity_err}};
  set_primary(rec, "db");
}

void theorem_trial(const SampleConfig& config, std::int64_t index, TrialRecord& rec) {
  const auto pair = sample_instance(config, index);
  fill_shape(rec, pair);
  const auto r = shift::check_theorem(pair, context_for(config, pair));
  rec.shift_norm = r.shift_norm;
  rec.checks.push_back(make_check("db", r.log_actual, r.log_bound_db));
  rec.checks.push_back(make_check("certificate", r.log_actual, r.log_certificate));
  rec.checks.push_back(make_check("chain", r.log_bound_db, r.log_certificate));
  set_primary(rec, "db");
}

void beta_trial(const SampleConfig& config, std::int64_t index, TrialRecord& rec) {
  const auto pair = sample_instance(config, index);
  fill_shape(rec, pair);
  rec.shift_norm = pair.shift_norm();
  const double floor = shift::beta_floor(pair.R());
  rec.checks.push_back(make_check("beta_t", floor, log_alpha(pair.A_t(), pair.x_t())));
  rec.checks.push_back(make_check("beta_next", floor, log_alpha(pair.A_next(), pair.x_next())));
  set_primary(rec, "beta_t");
}

SampleConfig effective_config(SuiteName suite, const SampleConfig& config) {
  SampleConfig c = config;
  switch (suite) {
    case SuiteName::lemmas_x:
    case SuiteName::theorem_x:
      c.kind = shift::ShiftKind::weight;
      break;
    case SuiteName::lemmas_A:
    case SuiteName::theorem_A:
      c.kind = shift::ShiftKind::data;
      break;
    case SuiteName::gradient:
      c.kind = shift::ShiftKind::weight;
      break;
    default:
      break;
  }
  return c;
}

bool theorem_mode(SuiteName suite) {
  return suite == SuiteName::lemmas_x || suite == SuiteName::lemmas_A ||
         suite == SuiteName::theorem_x || suite == SuiteName::theorem_A;
}

}  // namespace

const char* to_string(SuiteName suite) {
  switch (suite) {
    case SuiteName::gradient:
      return "gradient";
    case SuiteName::facts:
      return "facts";
    case SuiteName::lemmas_x:
      return "lemmas_x";
    case SuiteName::lemmas_A:
      return "lemmas_A";
    case SuiteName::theorem_x:
      return "theorem_x";
    case SuiteName::theorem_A:
      return "theorem_A";
    case SuiteName::beta:
      return "beta";
  }
  return "unknown";
}

std::optional<SuiteName> parse_suite_name(const std::string& s) {
  for (auto suite : {SuiteName::gradient, SuiteName::facts, SuiteName::lemmas_x,
                     SuiteName::lemmas_A, SuiteName::theorem_x, SuiteName::theorem_A,
                     SuiteName::beta}) {
    if (s == to_string(suite)) return suite;
  }
  return std::nullopt;
}

TrialRecord run_trial(SuiteName suite, const SampleConfig& config, std::int64_t trial_index) {
  const SampleConfig c = effective_config(suite, config);
  TrialRecord rec;
  rec.trial_index = trial_index;
  const auto start = std::chrono::steady_clock::now();
  switch (suite) {
    case SuiteName::gradient:
      gradient_trial(c, trial_index, rec);
      break;
    case SuiteName::facts:
      facts_trial(c, trial_index, rec);
      break;
    case SuiteName::lemmas_x:
    case SuiteName::lemmas_A:
      lemma_trial(c, trial_index, rec);
      break;
    case SuiteName::theorem_x:
    case SuiteName::theorem_A:
      theorem_trial(c, trial_index, rec);
      break;
    case SuiteName::beta:
      beta_trial(c, trial_index, rec);
      break;
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

SuiteReport run_suite(SuiteName suite, const SampleConfig& config, RunOptions opts) {
  config.validate();
  const SampleConfig c = effective_config(suite, config);
  if (theorem_mode(suite) && !(c.R >= 4.0)) {
    throw PreconditionViolation("R >= 4 required in theorem mode");
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(c.trials));
  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::int64_t first_error_index = c.trials;

  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= c.trials) return;
      try {
        records[static_cast<std::size_t>(i)] = run_trial(suite, c, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  unsigned workers = opts.workers != 0 ? opts.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::min<std::int64_t>(c.trials, 256))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  SuiteReport report;
  report.suite = to_string(suite);
  report.config = c;
  report.records = std::move(records);
  report.summary = summarize(report.records);
  return report;
}

}  // namespace softshift::harness
