#include "softshift/harness/sampler.hpp"

#include <cmath>

#include "softshift/errors.hpp"

namespace softshift::harness {

using namespace numkit;
using shift::ShiftKind;
using shift::ShiftPair;

const char* to_string(BMode mode) {
  switch (mode) {
    case BMode::simplex:
      return "simplex";
    case BMode::box01:
      return "box01";
    case BMode::gaussian:
      return "gaussian";
  }
  return "simplex";
}

const char* to_string(BetaMode mode) { return mode == BetaMode::floor ? "floor" : "empirical"; }

BMode parse_b_mode(const std::string& s) {
  if (s == "simplex") return BMode::simplex;
  if (s == "box01") return BMode::box01;
  if (s == "gaussian") return BMode::gaussian;
  throw PreconditionViolation("b_mode must be simplex, box01 or gaussian (got '" + s + "')");
}

BetaMode parse_beta_mode(const std::string& s) {
  if (s == "floor") return BetaMode::floor;
  if (s == "empirical") return BetaMode::empirical;
  throw PreconditionViolation("beta_mode must be floor or empirical (got '" + s + "')");
}

void SampleConfig::validate() const {
  if (n_range.lo < 1 || n_range.hi < n_range.lo) {
    throw PreconditionViolation("n_range must satisfy 1 <= lo <= hi");
  }
  if (d_range.lo < 1 || d_range.hi < d_range.lo) {
    throw PreconditionViolation("d_range must satisfy 1 <= lo <= hi");
  }
  if (!(R > 0.0) || !std::isfinite(R)) throw PreconditionViolation("R must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw PreconditionViolation("rho must lie in (0, 1)");
  if (trials < 1) throw PreconditionViolation("trials must be at least 1");
  if (!(fd_step >= 1e-8 && fd_step <= 1e-3)) {
    throw PreconditionViolation("fd_step must lie in [1e-8, 1e-3]");
  }
}

Vector sample_target(RngStream& rng, std::size_t n, BMode mode) {
  switch (mode) {
    case BMode::simplex:
      return rng.simplex(n);
    case BMode::box01: {
      Vector b(n);
      for (auto& v : b) v = rng.uniform();
      return b;
    }
    case BMode::gaussian:
      return rng.normal_vector(n);
  }
  return rng.simplex(n);
}

ShiftPair sample_instance(const SampleConfig& config, std::int64_t trial_index) {
  config.validate();
  RngStream rng(config.master_seed, static_cast<std::uint64_t>(trial_index));
  const double R = config.R;
  const double target_step = config.rho * shift::kStepCap;

  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(config.n_range.lo, config.n_range.hi));
    const auto d = static_cast<std::size_t>(rng.uniform_int(config.d_range.lo, config.d_range.hi));

    Matrix A = rng.normal_matrix(n, d);
    const double scale = spectral_norm(A);
    if (!(scale > 0.0)) continue;
    const double u = 0.2 + 0.8 * rng.uniform_open_closed();
    A = (u * R / scale) * A;

    const Vector x_t = rng.uniform_ball(d, 0.9 * R);
    Vector b = sample_target(rng, n, config.b_mode);

    if (config.kind == ShiftKind::weight) {
      const Vector dir = rng.unit_sphere(d);
      const double reach = linf_norm(matvec(A, dir));
      if (!(reach > 0.0)) continue;
      Vector x_next = x_t + (target_step / reach) * dir;
      const double nx = l2_norm(x_next);
      if (nx > R) x_next = (R / nx) * x_next;
      ShiftPair pair = ShiftPair::weight(std::move(A), std::move(b), x_t, std::move(x_next), R);
      if (!pair.violation()) return pair;
    } else {
      const Matrix dir = rng.normal_matrix(n, d);
      const double reach = linf_norm(matvec(dir, x_t));
      if (!(reach > 0.0)) continue;
      Matrix A_next = A + (target_step / reach) * dir;
      ShiftPair pair = ShiftPair::data(std::move(A), std::move(A_next), std::move(b), x_t, R);
      if (!pair.violation()) return pair;
    }
  }
  throw SamplerExhausted("sample_instance: trial " + std::to_string(trial_index) + " rejected " +
                         std::to_string(kMaxRejections) + " candidates; configuration infeasible");
}

}  // namespace softshift::harness
