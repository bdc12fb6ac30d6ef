#include "softshift/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "softshift/errors.hpp"
#include "softshift/harness/suite.hpp"
#include "softshift/icl_sim.hpp"

namespace softshift::cli {

namespace {

using harness::SampleConfig;
using harness::SuiteName;
using harness::SuiteReport;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  unsigned workers = 0;

  std::uint64_t seed = 0;
  std::int64_t trials = 10000;
  double r = 4.0;
  int n = 0;
  int n_min = 2;
  int n_max = 32;
  int d = 0;
  int d_min = 1;
  int d_max = 8;
  double rho = 0.5;
  std::string b_mode = "simplex";
  std::string beta_mode = "floor";
  double fd_step = 1e-5;

  std::string mode = "x";
  std::string suite = "theorem";

  std::string task = "linear";
  double eta = 0.001;
  int steps = 50;
  std::string sign = "descent";
  bool backtracking = false;

  std::string report_path;
};

struct Usage : Error {
  using Error::Error;
};

const char* const kCommands[] = {"verify-gradient", "verify-facts", "verify-bounds",
                                 "verify-beta",     "icl",          "plot"};

Options defaults_for(const std::string& command) {
  Options o;
  if (command == "verify-gradient") {
    // Gradient checks run on a smaller radius and size so finite differences
    // stay well conditioned.
    o.trials = 1000;
    o.r = 2.0;
    o.n_max = 16;
  }
  return o;
}

void add_output(CLI::App* sub, Options& o, bool formats) {
  sub->add_option("--config", o.config_path, "JSON file with flag values; flags override it")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o.out_path, "Output path (default: standard output)");
  if (formats) {
    sub->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  }
}

void add_sampler(CLI::App* sub, Options& o) {
  sub->add_option("--trials", o.trials, "Number of trials")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{100000000}))
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--r", o.r, "Norm radius R")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--n", o.n, "Fix n (overrides --n-min/--n-max)")->check(CLI::Range(1, 4096));
  sub->add_option("--n-min", o.n_min, "Smallest n")->check(CLI::Range(1, 4096))->capture_default_str();
  sub->add_option("--n-max", o.n_max, "Largest n")->check(CLI::Range(1, 4096))->capture_default_str();
  sub->add_option("--d", o.d, "Fix d (overrides --d-min/--d-max)")->check(CLI::Range(1, 4096));
  sub->add_option("--d-min", o.d_min, "Smallest d")->check(CLI::Range(1, 4096))->capture_default_str();
  sub->add_option("--d-max", o.d_max, "Largest d")->check(CLI::Range(1, 4096))->capture_default_str();
  sub->add_option("--rho", o.rho, "Shift size as a fraction of the 0.01 step cap, in (0, 1)")
      ->capture_default_str();
  sub->add_option("--b-mode", o.b_mode, "Target distribution")
      ->check(CLI::IsMember({"simplex", "box01", "gaussian"}))
      ->capture_default_str();
}

void add_workers(CLI::App* sub, Options& o) {
  sub->add_option("--workers", o.workers, "Worker threads (0: hardware concurrency)")
      ->capture_default_str();
}

void add_gd(CLI::App* sub, Options& o) {
  sub->add_option("--eta", o.eta, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--steps", o.steps, "Number of GD steps")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  sub->add_option("--sign", o.sign, "Update sign")
      ->check(CLI::IsMember({"descent", "paper_plus"}))
      ->capture_default_str();
  sub->add_flag("--backtracking", o.backtracking, "Halve eta until the loss does not increase");
}

// Registers every subcommand on `app`, binding each to its own Options.
void build(CLI::App& app, std::map<std::string, Options>& opts) {
  app.require_subcommand(1);
  for (const char* name : kCommands) opts[name] = defaults_for(name);

  auto* grad = app.add_subcommand("verify-gradient", "Analytic gradient against finite differences");
  add_output(grad, opts["verify-gradient"], true);
  add_sampler(grad, opts["verify-gradient"]);
  add_workers(grad, opts["verify-gradient"]);
  grad->add_option("--fd-step", opts["verify-gradient"].fd_step, "Central-difference step")
      ->capture_default_str();

  auto* facts = app.add_subcommand("verify-facts", "Vector norm facts");
  add_output(facts, opts["verify-facts"], true);
  add_sampler(facts, opts["verify-facts"]);
  add_workers(facts, opts["verify-facts"]);

  auto* bounds = app.add_subcommand("verify-bounds", "Lemma chain and certificates under shifts");
  add_output(bounds, opts["verify-bounds"], true);
  add_sampler(bounds, opts["verify-bounds"]);
  add_workers(bounds, opts["verify-bounds"]);
  bounds->add_option("--mode", opts["verify-bounds"].mode, "Shift kind: x (weights) or a (data)")
      ->check(CLI::IsMember({"x", "a"}))
      ->capture_default_str();
  bounds->add_option("--suite", opts["verify-bounds"].suite, "Which checks to run")
      ->check(CLI::IsMember({"lemmas", "theorem"}))
      ->capture_default_str();
  bounds->add_option("--beta-mode", opts["verify-bounds"].beta_mode, "Lower bound on alpha")
      ->check(CLI::IsMember({"floor", "empirical"}))
      ->capture_default_str();

  auto* beta = app.add_subcommand("verify-beta", "Normalizer floor exp(-R^2)");
  add_output(beta, opts["verify-beta"], true);
  add_sampler(beta, opts["verify-beta"]);
  add_workers(beta, opts["verify-beta"]);

  auto* icl = app.add_subcommand("icl", "Gradient descent against attention-layer updates");
  add_output(icl, opts["icl"], false);
  add_sampler(icl, opts["icl"]);
  add_gd(icl, opts["icl"]);
  icl->add_option("--task", opts["icl"].task, "Task")
      ->check(CLI::IsMember({"linear", "softmax"}))
      ->capture_default_str();

  auto* plot = app.add_subcommand("plot", "SVG scatter of a report");
  add_output(plot, opts["plot"], false);
  plot->add_option("--report", opts["plot"].report_path, "JSON report to plot")
      ->required()
      ->check(CLI::ExistingFile);
}

// Parses args into a fresh app; returns the selected subcommand.
CLI::App* parse(CLI::App& app, std::map<std::string, Options>& opts,
                const std::vector<std::string>& args) {
  build(app, opts);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);
  return app.get_subcommands().front();
}

std::string flag_for_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// Appends config-file values for every flag the command line left unset.
std::vector<std::string> merge_config(const CLI::App& sub, const std::string& path,
                                      std::vector<std::string> args) {
  std::ifstream in(path);
  if (!in) throw Usage("--config: cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Usage("--config: " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Usage("--config: " + path + " must hold a JSON object");

  for (const auto& [key, value] : j.items()) {
    const std::string flag = flag_for_key(key);
    if (flag == "--config") throw Usage("--config: nested config files are not supported");
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr) {
      throw Usage("--config: unknown key '" + key + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) {
        throw Usage("--config: key '" + key + "' expects a value, not a boolean");
      }
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else {
      throw Usage("--config: key '" + key + "' must be a number, string or boolean");
    }
  }
  return args;
}

SampleConfig sample_config(const Options& o) {
  SampleConfig c;
  c.n_range = o.n > 0 ? harness::IntRange{o.n, o.n} : harness::IntRange{o.n_min, o.n_max};
  c.d_range = o.d > 0 ? harness::IntRange{o.d, o.d} : harness::IntRange{o.d_min, o.d_max};
  c.R = o.r;
  c.rho = o.rho;
  c.b_mode = harness::parse_b_mode(o.b_mode);
  c.beta_mode = harness::parse_beta_mode(o.beta_mode);
  c.trials = o.trials;
  c.master_seed = o.seed;
  c.fd_step = o.fd_step;
  c.kind = o.mode == "a" ? shift::ShiftKind::data : shift::ShiftKind::weight;
  try {
    c.validate();
  } catch (const PreconditionViolation& e) {
    throw Usage(e.what());
  }
  return c;
}

void write_payload(const std::string& payload, const Options& o, std::ostream& out) {
  if (o.out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file) throw Usage("--out: cannot open " + o.out_path + " for writing");
  file << payload;
  if (!file) throw Error("--out: write to " + o.out_path + " failed");
}

SuiteName suite_for(const std::string& command, const Options& o) {
  if (command == "verify-gradient") return SuiteName::gradient;
  if (command == "verify-facts") return SuiteName::facts;
  if (command == "verify-beta") return SuiteName::beta;
  const bool data = o.mode == "a";
  if (o.suite == "lemmas") return data ? SuiteName::lemmas_A : SuiteName::lemmas_x;
  return data ? SuiteName::theorem_A : SuiteName::theorem_x;
}

const harness::TrialRecord* first_violation(const SuiteReport& report) {
  for (const auto& rec : report.records) {
    for (const auto& c : rec.checks) {
      if (!c.satisfied && !harness::is_informational(c.name)) return &rec;
    }
  }
  return nullptr;
}

int run_suite_command(const std::string& command, const Options& o, std::ostream& out,
                      std::ostream& err) {
  const SuiteName suite = suite_for(command, o);
  const SampleConfig config = sample_config(o);
  if (command == "verify-bounds" && config.R < 4.0) {
    throw Usage("R >= 4 required in theorem mode (got --r " + harness::format_double(config.R) +
                ")");
  }
  const SuiteReport report = harness::run_suite(suite, config, {o.workers});
  write_payload(o.format == "csv" ? harness::to_csv(report) : harness::to_json(report), o, out);

  if (const auto* bad = first_violation(report)) {
    err << "violation: " << report.summary.violations << " of " << report.records.size()
        << " trials failed a bound; first violating record:\n"
        << harness::to_json(*bad);
    return kExitViolation;
  }
  return kExitOk;
}

icl::GDConfig gd_config(const Options& o) {
  icl::GDConfig g;
  g.eta = o.eta;
  g.steps = o.steps;
  g.sign = o.sign == "paper_plus" ? icl::StepSign::paper_plus : icl::StepSign::descent;
  g.backtracking = o.backtracking;
  return g;
}

int run_icl_command(const Options& o, std::ostream& out, std::ostream& err) {
  SampleConfig config = sample_config(o);
  config.kind = shift::ShiftKind::weight;
  const icl::GDConfig gd = gd_config(o);

  std::vector<icl::TrajectoryStep> steps;
  if (o.task == "linear") {
    numkit::RngStream pick(o.seed, 1);
    const auto n = static_cast<std::size_t>(pick.uniform_int(config.n_range.lo, config.n_range.hi));
    const auto d = static_cast<std::size_t>(pick.uniform_int(config.d_range.lo, config.d_range.hi));
    steps = icl::run_linear_icl(icl::sample_linear_task(o.seed, n, d), gd);
  } else {
    const auto pair = harness::sample_instance(config, 0);
    const Instance instance = Instance::make(pair.A_t(), pair.b(), pair.R());
    steps = icl::run_softmax_icl(instance, pair.x_t(), gd);
  }
  write_payload(icl::trajectory_to_json(steps), o, out);

  for (const auto& s : steps) {
    bool bad = false;
    if (o.task == "linear") {
      bad = !(s.metrics.distance <= 1e-9);
    } else {
      bad = (s.log_bound && shift::safe_log(s.delta_b_norm) > *s.log_bound) ||
            (s.log_bound_data && s.delta_b_data_norm &&
             shift::safe_log(*s.delta_b_data_norm) > *s.log_bound_data);
    }
    if (bad) {
      err << "violation at step " << s.step << ":\n" << icl::trajectory_to_json({s});
      return kExitViolation;
    }
  }
  return kExitOk;
}

int run_plot_command(const Options& o, std::ostream& out) {
  std::ifstream in(o.report_path, std::ios::binary);
  if (!in) throw Usage("--report: cannot read " + o.report_path);
  std::stringstream text;
  text << in.rdbuf();
  write_payload(render_plot(harness::parse_report(text.str())), o, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::map<std::string, Options> opts;
  auto app = std::make_unique<CLI::App>("Softmax regression shift analysis and bound certification",
                                        "softshift");
  try {
    CLI::App* sub = parse(*app, opts, args);
    std::string command = sub->get_name();

    if (const std::string path = opts[command].config_path; !path.empty()) {
      const auto merged = merge_config(*sub, path, args);
      opts.clear();
      app = std::make_unique<CLI::App>(app->get_description(), "softshift");
      sub = parse(*app, opts, merged);
    }
    const Options& o = opts[command];
    if (command == "plot") return run_plot_command(o, out);
    if (command == "icl") return run_icl_command(o, out, err);
    return run_suite_command(command, o, out, err);
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app->exit(e, out, err);
    return kExitUsage;
  } catch (const Usage& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionViolation& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace softshift::cli
