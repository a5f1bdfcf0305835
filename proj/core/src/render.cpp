#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fpsrl/fuzzy.hpp"

namespace fpsrl {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double gauss(double c, double sigma, double x) {
  const double z = (x - c) / sigma;
  return std::exp(-0.5 * z * z);
}

// Plotted interval: the operating range widened to include the center.
Interval plot_range(const Interval& base, double center) {
  Interval r = base;
  if (r.extent() <= 0.0) r = {base.lo - 1.0, base.hi + 1.0};
  r.lo = std::min(r.lo, center);
  r.hi = std::max(r.hi, center);
  return r;
}

constexpr int kProfileWidth = 41;

std::string ascii_profile(double c, double sigma, const Interval& range) {
  static constexpr char levels[] = " .:-=#";
  std::string out(kProfileWidth, ' ');
  for (int k = 0; k < kProfileWidth; ++k) {
    const double x = range.lo + range.extent() * k / (kProfileWidth - 1);
    const double g = gauss(c, sigma, x);
    const int level = std::clamp(static_cast<int>(std::lround(g * 5.0)), 0, 5);
    out[static_cast<std::size_t>(k)] = levels[level];
  }
  return "|" + out + "|";
}

std::string state_tuple(const State& s) {
  std::string out = "(";
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j) out += ", ";
    out += fmt("%.4g", s[j]);
  }
  return out + ")";
}

}  // namespace

Rendering render_rules(const FuzzyPolicyParams& params, const std::vector<std::string>& labels,
                       const std::vector<Interval>& ranges, const std::vector<State>& samples) {
  const std::size_t d = params.state_dim();
  if (labels.size() != d) throw ContractViolation("render_rules: need one label per dimension");
  if (ranges.size() != d) throw ContractViolation("render_rules: need one range per dimension");

  std::size_t label_width = 0;
  for (const auto& l : labels) label_width = std::max(label_width, l.size());

  std::ostringstream txt;
  txt << "Fuzzy policy: " << params.rule_count() << " rules over " << d
      << " state variables, slope " << fmt("%.4g", params.slope) << ", action scale "
      << fmt("%.4g", params.scale) << "\n";
  for (std::size_t i = 0; i < params.rule_count(); ++i) {
    const auto& rule = params.rules[i];
    txt << "\nRule " << (i + 1) << ": IF s is m" << (i + 1) << " THEN o = "
        << fmt("%+.4g", rule.output) << "\n";
    for (std::size_t j = 0; j < d; ++j) {
      const Interval r = plot_range(ranges[j], rule.centers[j]);
      std::string label = labels[j];
      label.resize(label_width, ' ');
      txt << "  " << label << "  c = " << fmt("%+10.4g", rule.centers[j])
          << "  sigma = " << fmt("%9.4g", rule.widths[j]) << "  "
          << ascii_profile(rule.centers[j], rule.widths[j], r) << "  ["
          << fmt("%.3g", r.lo) << ", " << fmt("%.3g", r.hi) << "]\n";
    }
  }
  if (!samples.empty()) {
    txt << "\nExamples\n";
    for (const auto& s : samples) {
      txt << "  s = " << state_tuple(s) << ":";
      for (std::size_t i = 0; i < params.rule_count(); ++i)
        txt << "  m" << (i + 1) << " = " << fmt("%.4f", membership(params.rules[i], s));
      txt << "  ->  a = " << fmt("%+.4f", policy_output(params, s)) << "\n";
    }
  }

  // SVG: one row per rule, one panel per dimension, example rows below.
  constexpr int panel_w = 180, panel_h = 80, margin = 20, head_w = 110, row_gap = 24;
  const int rows = static_cast<int>(params.rule_count());
  const int width = head_w + static_cast<int>(d) * (panel_w + margin) + margin;
  const int table_h = 20 * static_cast<int>(samples.size() + 1);
  const int height = margin + rows * (panel_h + row_gap) + table_h + margin + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"monospace\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t j = 0; j < d; ++j) {
    const int x0 = head_w + static_cast<int>(j) * (panel_w + margin);
    svg << "<text x=\"" << x0 << "\" y=\"" << margin - 6 << "\">" << labels[j] << "</text>\n";
  }
  for (int i = 0; i < rows; ++i) {
    const auto& rule = params.rules[static_cast<std::size_t>(i)];
    const int y0 = margin + i * (panel_h + row_gap);
    svg << "<text x=\"4\" y=\"" << y0 + panel_h / 2 << "\">Rule " << (i + 1) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << y0 + panel_h / 2 + 14 << "\">o = "
        << fmt("%+.3g", rule.output) << "</text>\n";
    for (std::size_t j = 0; j < d; ++j) {
      const int x0 = head_w + static_cast<int>(j) * (panel_w + margin);
      const Interval r = plot_range(ranges[j], rule.centers[j]);
      auto px = [&](double x) { return x0 + panel_w * (x - r.lo) / r.extent(); };
      auto py = [&](double g) { return y0 + panel_h * (1.0 - g); };
      svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\""
          << panel_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
      for (const auto& s : samples) {
        const double g = gauss(rule.centers[j], rule.widths[j], s[j]);
        if (s[j] < r.lo || s[j] > r.hi) continue;
        svg << "<rect x=\"" << x0 << "\" y=\"" << fmt("%.2f", py(g)) << "\" width=\"" << panel_w
            << "\" height=\"" << fmt("%.2f", panel_h * g)
            << "\" fill=\"#888\" fill-opacity=\"0.15\"/>\n";
        svg << "<line x1=\"" << fmt("%.2f", px(s[j])) << "\" y1=\"" << y0 << "\" x2=\""
            << fmt("%.2f", px(s[j])) << "\" y2=\"" << y0 + panel_h
            << "\" stroke=\"red\"/>\n";
      }
      svg << "<polyline fill=\"none\" stroke=\"blue\" points=\"";
      constexpr int n = 60;
      for (int k = 0; k <= n; ++k) {
        const double x = r.lo + r.extent() * k / n;
        svg << (k ? " " : "") << fmt("%.2f", px(x)) << "," << fmt("%.2f", py(gauss(rule.centers[j], rule.widths[j], x)));
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << x0 + 2 << "\" y=\"" << y0 + panel_h + 12 << "\">c="
          << fmt("%.3g", rule.centers[j]) << " s=" << fmt("%.3g", rule.widths[j]) << "</text>\n";
    }
  }
  int ty = margin + rows * (panel_h + row_gap) + 14;
  svg << "<text x=\"4\" y=\"" << ty << "\">Examples</text>\n";
  for (const auto& s : samples) {
    ty += 20;
    std::string line = "s = " + state_tuple(s) + ":";
    for (std::size_t i = 0; i < params.rule_count(); ++i)
      line += "  m" + std::to_string(i + 1) + "=" + fmt("%.3f", membership(params.rules[i], s));
    line += "  a = " + fmt("%+.4f", policy_output(params, s));
    svg << "<text x=\"4\" y=\"" << ty << "\">" << line << "</text>\n";
  }
  svg << "</svg>\n";
  return {txt.str(), svg.str()};
}

}  // namespace fpsrl
