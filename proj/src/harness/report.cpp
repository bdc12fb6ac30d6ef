#include "softshift/harness/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "softshift/errors.hpp"

namespace softshift::harness {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError("report: field '" + where + "' is not a number");
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError("report: '" + where + "' is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("report: missing field '" + where + "." + key + "'");
  return *it;
}

template <typename T>
T read_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError("report: field '" + where + "' is not an integer");
  return j.get<T>();
}

Json config_to_json(const SampleConfig& c) {
  Json j;
  j["n_range"] = {c.n_range.lo, c.n_range.hi};
  j["d_range"] = {c.d_range.lo, c.d_range.hi};
  j["R"] = number(c.R);
  j["rho"] = number(c.rho);
  j["b_mode"] = to_string(c.b_mode);
  j["kind"] = shift::to_string(c.kind);
  j["beta_mode"] = to_string(c.beta_mode);
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["fd_step"] = number(c.fd_step);
  return j;
}

IntRange read_range(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError("report: '" + where + "' must be [lo, hi]");
  return {read_int<int>(j[0], where), read_int<int>(j[1], where)};
}

SampleConfig config_from_json(const Json& j) {
  SampleConfig c;
  c.n_range = read_range(field(j, "n_range", "config"), "config.n_range");
  c.d_range = read_range(field(j, "d_range", "config"), "config.d_range");
  c.R = read_number(field(j, "R", "config"), "config.R");
  c.rho = read_number(field(j, "rho", "config"), "config.rho");
  try {
    c.b_mode = parse_b_mode(field(j, "b_mode", "config").get<std::string>());
    c.beta_mode = parse_beta_mode(field(j, "beta_mode", "config").get<std::string>());
  } catch (const Json::exception& e) {
    throw ParseError(std::string("report: config: ") + e.what());
  } catch (const PreconditionViolation& e) {
    throw ParseError(std::string("report: config: ") + e.what());
  }
  const Json& kind = field(j, "kind", "config");
  if (kind == "x") {
    c.kind = shift::ShiftKind::weight;
  } else if (kind == "A") {
    c.kind = shift::ShiftKind::data;
  } else {
    throw ParseError("report: config.kind must be \"x\" or \"A\"");
  }
  c.trials = read_int<std::int64_t>(field(j, "trials", "config"), "config.trials");
  c.master_seed = read_int<std::uint64_t>(field(j, "master_seed", "config"), "config.master_seed");
  c.fd_step = read_number(field(j, "fd_step", "config"), "config.fd_step");
  return c;
}

Json record_to_json(const TrialRecord& r, bool wall_time) {
  Json j;
  j["trial_index"] = r.trial_index;
  j["n"] = r.n;
  j["d"] = r.d;
  j["R"] = number(r.R);
  j["shift_norm"] = number(r.shift_norm);
  j["log_actual"] = number(r.log_actual);
  Json bounds = Json::object();
  Json actuals = Json::object();
  Json satisfied = Json::object();
  for (const auto& c : r.checks) {
    bounds[c.name] = number(c.log_bound);
    actuals[c.name] = number(c.log_actual);
    satisfied[c.name] = c.satisfied;
  }
  j["log_bounds"] = std::move(bounds);
  j["log_actuals"] = std::move(actuals);
  j["slack_log"] = number(r.slack_log);
  j["satisfied"] = std::move(satisfied);
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
  j["metrics"] = std::move(metrics);
  if (wall_time) j["wall_time"] = number(r.wall_time);
  return j;
}

TrialRecord record_from_json(const Json& j, std::size_t index) {
  const std::string where = "records[" + std::to_string(index) + "]";
  TrialRecord r;
  r.trial_index = read_int<std::int64_t>(field(j, "trial_index", where), where + ".trial_index");
  r.n = read_int<int>(field(j, "n", where), where + ".n");
  r.d = read_int<int>(field(j, "d", where), where + ".d");
  r.R = read_number(field(j, "R", where), where + ".R");
  r.shift_norm = read_number(field(j, "shift_norm", where), where + ".shift_norm");
  r.log_actual = read_number(field(j, "log_actual", where), where + ".log_actual");
  r.slack_log = read_number(field(j, "slack_log", where), where + ".slack_log");
  const Json& bounds = field(j, "log_bounds", where);
  const Json& actuals = field(j, "log_actuals", where);
  const Json& satisfied = field(j, "satisfied", where);
  if (!bounds.is_object()) throw ParseError("report: " + where + ".log_bounds is not an object");
  for (auto it = bounds.begin(); it != bounds.end(); ++it) {
    const std::string name = it.key();
    Check c;
    c.name = name;
    c.log_bound = read_number(it.value(), where + ".log_bounds." + name);
    c.log_actual = read_number(field(actuals, name.c_str(), where + ".log_actuals"),
                               where + ".log_actuals." + name);
    const Json& s = field(satisfied, name.c_str(), where + ".satisfied");
    if (!s.is_boolean()) throw ParseError("report: " + where + ".satisfied." + name + " is not a bool");
    c.satisfied = s.get<bool>();
    r.checks.push_back(std::move(c));
  }
  if (auto it = j.find("metrics"); it != j.end()) {
    if (!it->is_object()) throw ParseError("report: " + where + ".metrics is not an object");
    for (auto m = it->begin(); m != it->end(); ++m) {
      r.metrics.emplace_back(m.key(), read_number(m.value(), where + ".metrics." + m.key()));
    }
  }
  if (auto it = j.find("wall_time"); it != j.end()) {
    r.wall_time = read_number(*it, where + ".wall_time");
  }
  return r;
}

Json summary_to_json(const Summary& s) {
  Json j;
  j["violations"] = s.violations;
  Json per = Json::object();
  Json min_slack = Json::object();
  Json informational = Json::array();
  for (const auto& b : s.bounds) {
    per[b.name] = b.violations;
    min_slack[b.name] = number(b.min_slack_log);
    if (b.informational) informational.push_back(b.name);
  }
  j["violations_per_bound"] = std::move(per);
  j["min_slack_log"] = std::move(min_slack);
  j["median_slack_log"] = number(s.median_slack_log);
  j["informational"] = std::move(informational);
  for (const auto& [k, v] : s.metric_max) j["max_" + k] = number(v);
  return j;
}

}  // namespace

const Check* TrialRecord::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool is_informational(std::string_view check_name) {
  constexpr std::string_view suffix = "_statement";
  return check_name.size() >= suffix.size() &&
         check_name.substr(check_name.size() - suffix.size()) == suffix;
}

Summary summarize(const std::vector<TrialRecord>& records) {
  Summary s;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : records) {
    for (const auto& c : r.checks) {
      auto [it, inserted] = slot.try_emplace(c.name, s.bounds.size());
      if (inserted) s.bounds.push_back({c.name, 0, kInf, is_informational(c.name)});
      BoundSummary& b = s.bounds[it->second];
      if (!c.satisfied) ++b.violations;
      const double slack = c.log_actual == -kInf ? kInf : c.log_bound - c.log_actual;
      b.min_slack_log = std::min(b.min_slack_log, slack);
    }
    for (const auto& [k, v] : r.metrics) {
      auto it = std::find_if(s.metric_max.begin(), s.metric_max.end(),
                             [&](const auto& e) { return e.first == k; });
      if (it == s.metric_max.end()) {
        s.metric_max.emplace_back(k, v);
      } else {
        it->second = std::max(it->second, v);
      }
    }
  }
  for (const auto& b : s.bounds) {
    if (!b.informational) s.violations += b.violations;
  }
  std::vector<double> slacks;
  slacks.reserve(records.size());
  for (const auto& r : records) slacks.push_back(r.slack_log);
  if (!slacks.empty()) {
    std::sort(slacks.begin(), slacks.end());
    const std::size_t m = slacks.size() / 2;
    s.median_slack_log = slacks.size() % 2 == 1 ? slacks[m] : 0.5 * (slacks[m - 1] + slacks[m]);
  }
  return s;
}

std::string to_json(const SuiteReport& report, JsonOptions opts) {
  Json j;
  j["suite"] = report.suite;
  j["config"] = config_to_json(report.config);
  Json records = Json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r, opts.include_wall_time));
  j["records"] = std::move(records);
  j["summary"] = summary_to_json(report.summary);
  return j.dump(opts.indent) + "\n";
}

std::string to_json(const TrialRecord& record, JsonOptions opts) {
  return record_to_json(record, opts.include_wall_time).dump(opts.indent) + "\n";
}

SuiteReport parse_report(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  SuiteReport report;
  const Json& suite = field(j, "suite", "report");
  if (!suite.is_string()) throw ParseError("report: 'suite' is not a string");
  report.suite = suite.get<std::string>();
  report.config = config_from_json(field(j, "config", "report"));
  const Json& records = field(j, "records", "report");
  if (!records.is_array()) throw ParseError("report: 'records' is not an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.records.push_back(record_from_json(records[i], i));
  }
  field(j, "summary", "report");
  // The summary is derived data; recomputing it keeps it consistent with the
  // records that were actually read.
  report.summary = summarize(report.records);
  return report;
}

std::string format_double(double v, int significant_digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general,
                           significant_digits);
  return std::string(buf, res.ptr);
}

std::string to_csv(const SuiteReport& report, bool include_wall_time) {
  std::ostringstream os;
  os << "trial_index,n,d,R,shift_norm,log_actual,slack_log";
  std::vector<std::string> checks;
  std::vector<std::string> metrics;
  if (!report.records.empty()) {
    for (const auto& c : report.records.front().checks) checks.push_back(c.name);
    for (const auto& m : report.records.front().metrics) metrics.push_back(m.first);
  }
  for (const auto& name : checks) {
    os << ",log_actual." << name << ",log_bound." << name << ",satisfied." << name;
  }
  for (const auto& name : metrics) os << ",metric." << name;
  if (include_wall_time) os << ",wall_time";
  os << "\n";
  for (const auto& r : report.records) {
    os << r.trial_index << ',' << r.n << ',' << r.d << ',' << format_double(r.R) << ','
       << format_double(r.shift_norm) << ',' << format_double(r.log_actual) << ','
       << format_double(r.slack_log);
    for (const auto& name : checks) {
      const Check* c = r.find(name);
      if (c == nullptr) {
        os << ",,,";
        continue;
      }
      os << ',' << format_double(c->log_actual) << ',' << format_double(c->log_bound) << ','
         << (c->satisfied ? "true" : "false");
    }
    for (const auto& name : metrics) {
      os << ',';
      for (const auto& [k, v] : r.metrics) {
        if (k == name) {
          os << format_double(v);
          break;
        }
      }
    }
    if (include_wall_time) os << ',' << format_double(r.wall_time);
    os << "\n";
  }
  return os.str();
}

}  // namespace softshift::harness
