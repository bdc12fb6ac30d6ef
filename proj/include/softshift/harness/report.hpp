#pragma once
// Trial records, suite reports, and their JSON/CSV forms.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "softshift/harness/sampler.hpp"

namespace softshift::harness {

// One property check inside a trial: satisfied iff log_actual <= log_bound.
struct Check {
  std::string name;
  double log_actual = 0.0;
  double log_bound = 0.0;
  bool satisfied = true;
  bool operator==(const Check&) const = default;
};

struct TrialRecord {
  std::int64_t trial_index = 0;
  int n = 0;
  int d = 0;
  double R = 0.0;
  double shift_norm = 0.0;
  // Primary check of the suite (the delta_b bound for lemma/theorem suites).
  double log_actual = 0.0;
  double slack_log = 0.0;
  std::vector<Check> checks;
  // Suite-specific scalars, e.g. rel_err for the gradient suite.
  std::vector<std::pair<std::string, double>> metrics;
  double wall_time = 0.0;

  const Check* find(std::string_view name) const;
  bool operator==(const TrialRecord&) const = default;
};

struct BoundSummary {
  std::string name;
  std::int64_t violations = 0;
  double min_slack_log = 0.0;
  bool informational = false;
  bool operator==(const BoundSummary&) const = default;
};

struct Summary {
  // Violations of gating checks; informational checks are reported per
  // bound but not counted here.
  std::int64_t violations = 0;
  std::vector<BoundSummary> bounds;
  double median_slack_log = 0.0;
  // max_<metric> over records, in first-seen order.
  std::vector<std::pair<std::string, double>> metric_max;
  bool operator==(const Summary&) const = default;
};

struct SuiteReport {
  std::string suite;
  SampleConfig config;
  std::vector<TrialRecord> records;
  Summary summary;
  bool operator==(const SuiteReport&) const = default;
};

// Checks whose names end in "_statement" are informational.
bool is_informational(std::string_view check_name);

Summary summarize(const std::vector<TrialRecord>& records);

struct JsonOptions {
  bool include_wall_time = true;
  int indent = 2;
};

// {"suite", "config", "records", "summary"}. Non-finite numbers are written
// as the strings "inf", "-inf", "nan".
std::string to_json(const SuiteReport& report, JsonOptions opts = {});
// A single record, e.g. for printing a violating trial.
std::string to_json(const TrialRecord& record, JsonOptions opts = {});
// Throws ParseError naming the offending field.
SuiteReport parse_report(std::string_view json);

// One row per record, header row first, floats with 17 significant digits.
std::string to_csv(const SuiteReport& report, bool include_wall_time = true);

// Shortest-form exact double formatting used by CSV and SVG output.
std::string format_double(double v, int significant_digits = 17);

}  // namespace softshift::harness
