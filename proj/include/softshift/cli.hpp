#pragma once
// Command-line front end. run() is the whole program minus process plumbing,
// so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

#include "softshift/harness/report.hpp"

namespace softshift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. The payload goes to --out when given,
// otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Scatter of log_actual against log_bound for each record's primary check,
// with the y = x line. Deterministic bytes for a given report.
std::string render_plot(const harness::SuiteReport& report);

// Reads a JSON report and writes its SVG. Throws ParseError on a bad report.
void emit_plot(const std::string& report_path, const std::string& out_path);

}  // namespace softshift::cli
