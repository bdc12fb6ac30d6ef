#pragma once
// Random instances inside the theorem hypothesis region.

#include <cstdint>
#include <string>

#include "softshift/numkit/rng.hpp"
#include "softshift/shift_analysis.hpp"

namespace softshift::harness {

struct IntRange {
  int lo = 1;
  int hi = 1;
  bool operator==(const IntRange&) const = default;
};

enum class BMode { simplex, box01, gaussian };
enum class BetaMode { floor, empirical };

const char* to_string(BMode mode);
const char* to_string(BetaMode mode);
BMode parse_b_mode(const std::string& s);
BetaMode parse_beta_mode(const std::string& s);

struct SampleConfig {
  IntRange n_range{2, 32};
  IntRange d_range{1, 8};
  double R = 4.0;
  // Fraction of the 0.01 infinity-norm step cap used by each shift.
  double rho = 0.5;
  BMode b_mode = BMode::simplex;
  shift::ShiftKind kind = shift::ShiftKind::weight;
  BetaMode beta_mode = BetaMode::floor;
  std::int64_t trials = 10000;
  std::uint64_t master_seed = 0;
  // Central-difference step for the gradient suite.
  double fd_step = 1e-5;

  // Throws PreconditionViolation naming the offending field.
  void validate() const;
  bool operator==(const SampleConfig&) const = default;
};

inline constexpr int kMaxRejections = 100;

// Pair of the configured kind for trial `trial_index`, drawn from the stream
// (master_seed, trial_index):
//  - A has i.i.d. standard normal entries, rescaled to spectral norm u R with
//    u uniform in (0.2, 1];
//  - x_t is uniform in the ball of radius 0.9 R;
//  - the shift is scaled so its infinity-norm effect on Ax equals rho * 0.01;
//  - b follows config.b_mode.
// Candidates that fail the pair invariants are redrawn; after kMaxRejections
// the sampler throws SamplerExhausted.
shift::ShiftPair sample_instance(const SampleConfig& config, std::int64_t trial_index);

numkit::Vector sample_target(numkit::RngStream& rng, std::size_t n, BMode mode);

}  // namespace softshift::harness
