#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "softshift/cli.hpp"
#include "softshift/harness/report.hpp"

using softshift::cli::run;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::path(SOFTSHIFT_TEST_TMPDIR) / "cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, GradientDefaultsPass) {
  const auto r = call({"verify-gradient", "--trials", "100", "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["summary"]["violations"], 0);
  EXPECT_LE(j["summary"]["max_rel_err"].get<double>(), 1e-6);
  EXPECT_EQ(j["config"]["R"], 2.0);
  EXPECT_EQ(j["config"]["n_range"][1], 16);
}

TEST(Cli, BoundsWriteReportFile) {
  const auto path = temp_path("rpt.json");
  const auto r = call({"verify-bounds", "--mode", "x", "--trials", "200", "--r", "4", "--seed", "7",
                       "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto report = softshift::harness::parse_report(slurp(path));
  EXPECT_EQ(report.suite, "theorem_x");
  EXPECT_EQ(report.summary.violations, 0);
  EXPECT_EQ(report.records.size(), 200u);
}

TEST(Cli, BoundsDataModeAndLemmas) {
  const auto r = call({"verify-bounds", "--mode", "a", "--suite", "lemmas", "--trials", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["suite"], "lemmas_A");
}

TEST(Cli, TheoremModeRejectsSmallRadius) {
  const auto r = call({"verify-bounds", "--r", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("R >= 4 required in theorem mode"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  const auto trials = call({"verify-facts", "--trials", "0"});
  EXPECT_EQ(trials.code, 2);
  EXPECT_NE(trials.err.find("--trials"), std::string::npos) << trials.err;
  EXPECT_EQ(call({"verify-bounds", "--mode", "z"}).code, 2);
  EXPECT_EQ(call({"verify-facts", "--rho", "1.5"}).code, 2);
  EXPECT_EQ(call({"verify-facts", "--format", "xml"}).code, 2);
  EXPECT_EQ(call({"icl", "--format", "csv"}).code, 2);
  EXPECT_EQ(call({"plot"}).code, 2);
  EXPECT_EQ(call({"verify-facts", "--n-min", "5", "--n-max", "3"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify-bounds"), std::string::npos);
}

TEST(Cli, ViolationExitsOneAndPrintsRecord) {
  // A coarse finite-difference step breaks the 1e-6 gradient tolerance.
  const auto r = call({"verify-gradient", "--fd-step", "1e-3", "--trials", "50"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("\"trial_index\""), std::string::npos) << r.err;
  EXPECT_FALSE(r.out.empty());
}

TEST(Cli, CsvFormat) {
  const auto r = call({"verify-beta", "--trials", "5", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("trial_index,", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = temp_path("cfg.json");
  std::ofstream(cfg) << R"({"trials": 12, "seed": 3, "r": 6, "n_max": 5})";
  const auto from_file = call({"verify-beta", "--config", cfg.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  auto j = nlohmann::json::parse(from_file.out);
  EXPECT_EQ(j["config"]["trials"], 12);
  EXPECT_EQ(j["config"]["master_seed"], 3);
  EXPECT_EQ(j["config"]["R"], 6.0);
  EXPECT_EQ(j["config"]["n_range"][1], 5);

  const auto overridden = call({"verify-beta", "--config", cfg.string(), "--trials", "4"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  j = nlohmann::json::parse(overridden.out);
  EXPECT_EQ(j["config"]["trials"], 4);
  EXPECT_EQ(j["config"]["R"], 6.0);

  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << R"({"colour": 1})";
  const auto r = call({"verify-beta", "--config", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST(Cli, IclTasks) {
  const auto lin = call({"icl", "--task", "linear", "--steps", "5", "--seed", "2"});
  ASSERT_EQ(lin.code, 0) << lin.err;
  const auto j = nlohmann::json::parse(lin.out);
  ASSERT_EQ(j.size(), 5u);
  EXPECT_LE(j[4]["metrics"]["distance"].get<double>(), 1e-9);

  const auto soft = call({"icl", "--task", "softmax", "--steps", "5", "--backtracking"});
  ASSERT_EQ(soft.code, 0) << soft.err;
  EXPECT_TRUE(nlohmann::json::parse(soft.out)[0].contains("delta_b_data_norm"));

  EXPECT_EQ(call({"icl", "--task", "linear", "--steps", "3"}).out,
            call({"icl", "--task", "linear", "--steps", "3"}).out);
}

TEST(Cli, PlotIsDeterministic) {
  const auto report = temp_path("plot_report.json");
  ASSERT_EQ(call({"verify-bounds", "--trials", "50", "--out", report.string()}).code, 0);
  const auto svg = temp_path("plot.svg");
  ASSERT_EQ(call({"plot", "--report", report.string(), "--out", svg.string()}).code, 0);
  const std::string first = slurp(svg);
  EXPECT_EQ(first.rfind("<?xml", 0), 0u);
  EXPECT_NE(first.find("<circle"), std::string::npos);
  EXPECT_EQ(first.find("crimson"), std::string::npos);
  EXPECT_EQ(call({"plot", "--report", report.string()}).out, first);

  softshift::cli::emit_plot(report.string(), temp_path("plot2.svg").string());
  EXPECT_EQ(slurp(temp_path("plot2.svg")), first);
}

TEST(Cli, PlotPointsBelowDiagonal) {
  const auto report = softshift::harness::parse_report(
      call({"verify-bounds", "--trials", "100", "--seed", "1"}).out);
  const std::string svg = softshift::cli::render_plot(report);
  // Screen y grows downwards: below y = x means cy > the diagonal at cx.
  std::size_t pos = 0;
  int points = 0;
  const double lo_y = 416.0, hi_y = 64.0, lo_x = 64.0, hi_x = 576.0;
  while ((pos = svg.find("<circle cx=\"", pos)) != std::string::npos) {
    pos += 12;
    const double cx = std::stod(svg.substr(pos));
    const double cy = std::stod(svg.substr(svg.find("cy=\"", pos) + 4));
    const double diag = lo_y + (cx - lo_x) / (hi_x - lo_x) * (hi_y - lo_y);
    EXPECT_GT(cy, diag);
    ++points;
  }
  EXPECT_EQ(points, 100);
}

TEST(Cli, PlotEmptyReportHasAxesOnly) {
  softshift::harness::SuiteReport empty;
  empty.suite = "theorem_x";
  const std::string svg = softshift::cli::render_plot(empty);
  EXPECT_NE(svg.find("<line"), std::string::npos);
  EXPECT_EQ(svg.find("<circle"), std::string::npos);
  EXPECT_EQ(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_EQ(svg, softshift::cli::render_plot(empty));
}

TEST(Cli, PlotRejectsBadReport) {
  const auto bad = temp_path("broken.json");
  std::ofstream(bad) << "{\"suite\": 3}";
  const auto r = call({"plot", "--report", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("suite"), std::string::npos);
}
