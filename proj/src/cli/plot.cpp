#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "softshift/cli.hpp"
#include "softshift/errors.hpp"

namespace softshift::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 64.0;
constexpr int kTicks = 5;

std::string fmt(double v) { return harness::format_double(v, 6); }

// The check that drives the record's slack, falling back to the first
// gating check.
const harness::Check* primary_check(const harness::TrialRecord& rec) {
  for (const char* name : {"db", "gradient", "exp_perturbation", "beta_t"}) {
    if (const auto* c = rec.find(name)) return c;
  }
  for (const auto& c : rec.checks) {
    if (!harness::is_informational(c.name)) return &c;
  }
  return nullptr;
}

struct Point {
  double bound;
  double actual;
  bool satisfied;
};

}  // namespace

std::string render_plot(const harness::SuiteReport& report) {
  std::vector<Point> points;
  for (const auto& rec : report.records) {
    const auto* c = primary_check(rec);
    if (c == nullptr || !std::isfinite(c->log_bound) || !std::isfinite(c->log_actual)) continue;
    points.push_back({c->log_bound, c->log_actual, c->satisfied});
  }

  // One shared range for both axes so y = x is the diagonal.
  double lo = 0.0;
  double hi = 1.0;
  if (!points.empty()) {
    lo = hi = points.front().bound;
    for (const auto& p : points) {
      lo = std::min({lo, p.bound, p.actual});
      hi = std::max({hi, p.bound, p.actual});
    }
    const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
    lo -= pad;
    hi += pad;
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto sx = [&](double v) { return kMargin + (v - lo) / (hi - lo) * plot_w; };
  auto sy = [&](double v) { return kHeight - kMargin - (v - lo) / (hi - lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
      << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << report.suite << " ("
      << points.size() << " points)</text>\n";

  // Axes.
  const double x0 = kMargin;
  const double y0 = kHeight - kMargin;
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(kWidth - kMargin)
      << "\" y2=\"" << fmt(y0) << "\"/>\n"
      << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
      << "\" y2=\"" << fmt(kMargin) << "\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double v = lo + (hi - lo) * i / kTicks;
    svg << "<line x1=\"" << fmt(sx(v)) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(sx(v))
        << "\" y2=\"" << fmt(y0 + 5) << "\"/>\n"
        << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(sy(v)) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(sy(v)) << "\"/>\n";
  }
  svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double v = lo + (hi - lo) * i / kTicks;
    svg << "<text x=\"" << fmt(sx(v)) << "\" y=\"" << fmt(y0 + 18)
        << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n"
        << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(sy(v) + 3)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  svg << "</g>\n"
      << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"" << fmt(kHeight - 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log bound</text>\n"
      << "<text x=\"16\" y=\"" << fmt(kHeight / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << fmt(kHeight / 2) << ")\">log actual</text>\n";

  if (!points.empty()) {
    svg << "<line x1=\"" << fmt(sx(lo)) << "\" y1=\"" << fmt(sy(lo)) << "\" x2=\"" << fmt(sx(hi))
        << "\" y2=\"" << fmt(sy(hi)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n"
        << "<g fill-opacity=\"0.6\">\n";
    for (const auto& p : points) {
      svg << "<circle cx=\"" << fmt(sx(p.bound)) << "\" cy=\"" << fmt(sy(p.actual))
          << "\" r=\"2\" fill=\"" << (p.satisfied ? "steelblue" : "crimson") << "\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::string& report_path, const std::string& out_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw ParseError("plot: cannot read " + report_path);
  std::stringstream text;
  text << in.rdbuf();
  const std::string svg = render_plot(harness::parse_report(text.str()));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("plot: cannot write " + out_path);
  out << svg;
}

}  // namespace softshift::cli
