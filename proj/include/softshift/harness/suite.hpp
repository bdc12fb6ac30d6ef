#pragma once
// Property suites over sampled instances.

#include <optional>
#include <string>

#include "softshift/harness/report.hpp"

namespace softshift::harness {

enum class SuiteName { gradient, facts, lemmas_x, lemmas_A, theorem_x, theorem_A, beta };

const char* to_string(SuiteName suite);
std::optional<SuiteName> parse_suite_name(const std::string& s);

// Tolerances of the gradient check: |g - fd| <= max(rel * |g|, abs).
inline constexpr double kGradRelTol = 1e-6;
inline constexpr double kGradAbsTol = 1e-9;
// Identity checks (split and defining identity of delta_b).
inline constexpr double kIdentityRelTol = 1e-12;

struct RunOptions {
  // 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
};

// One trial of a suite. Deterministic in (suite, config, trial_index).
TrialRecord run_trial(SuiteName suite, const SampleConfig& config, std::int64_t trial_index);

// Runs config.trials trials, possibly in parallel, and orders records by
// trial_index. Lemma and theorem suites force the shift kind from the suite
// name and require R >= 4.
SuiteReport run_suite(SuiteName suite, const SampleConfig& config, RunOptions opts = {});

}  // namespace softshift::harness
