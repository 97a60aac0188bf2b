#include "decisive/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "decisive/error.hpp"

namespace decisive {

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return fmt::format("{:.2f}", v); }

struct Segment {
  double x0, y0, x1, y1;
};

// Line through a and b clipped to the unit square (Liang-Barsky).
Segment clip_to_unit(double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  if (dx == 0.0 && dy == 0.0) return {ax, ay, bx, by};
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const auto bound = [&](double p, double q) {
    if (p == 0.0) return;
    const double t = q / p;
    if (p < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  };
  bound(-dx, ax);
  bound(dx, 1.0 - ax);
  bound(-dy, ay);
  bound(dy, 1.0 - ay);
  return {ax + t0 * dx, ay + t0 * dy, ax + t1 * dx, ay + t1 * dy};
}

}  // namespace

std::string reliability_svg(const MetricReport& report, const PlotFrame& f) {
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}px\" height=\"{}px\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\">\n",
      f.width, f.height, f.width, f.height);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", f.width, f.height);

  const std::string title = report.dataset.name.empty() ? "reliability" : report.dataset.name;
  s += fmt::format("<text class=\"title\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"18\">{}</text>\n",
                   px(f.left + f.size / 2), px(f.top - 22), xml_escape(title));

  s += "<g class=\"data\">\n";
  s += fmt::format(
      "<!-- gamma={} bins={} prob_sum_tolerance={} value_epsilon={} correct_decisions_only={} -->\n",
      report.config.gamma, report.config.bins, report.config.prob_sum_tolerance, report.config.value_epsilon,
      report.config.correct_decisions_only);

  // Frame, ticks and grid.
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
                   px(f.left), px(f.top), px(f.size), px(f.size));
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px(f.x(v)),
                     px(f.y(0)), px(f.y(1)));
    s += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#ddd\"/>\n", px(f.y(v)),
                     px(f.x(0)), px(f.x(1)));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{:.1f}</text>\n",
                     px(f.x(v)), px(f.y(0) + 18), v);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\">{:.1f}</text>\n",
                     px(f.x(0) - 8), px(f.y(v) + 4), v);
  }

  for (const auto& b : report.bin_table.bins) {
    const double x0 = f.x(b.lo);
    const double w = std::max(f.x(b.hi) - x0, 1.0);
    s += fmt::format(
        "<rect class=\"bin\" data-lo=\"{}\" data-hi=\"{}\" data-fraction=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" "
        "height=\"{}\" fill=\"#3b6fd4\" fill-opacity=\"0.6\" stroke=\"#1f3f80\" stroke-width=\"0.5\"/>\n",
        b.lo, b.hi, b.fraction, px(x0), px(f.y(b.fraction)), px(w), px(b.fraction * f.size));
  }

  s += fmt::format(
      "<line class=\"identity\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#1a9e3a\" stroke-width=\"2\"/>\n",
      px(f.x(0)), px(f.y(0)), px(f.x(1)), px(f.y(1)));

  const auto& rep = report.reported;
  const auto& tru = report.truth;
  const auto seg = clip_to_unit(rep.robustness, tru.robustness, rep.decisiveness, tru.decisiveness);
  s += fmt::format(
      "<line class=\"slope\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d01fc8\" stroke-width=\"2\"/>\n",
      px(f.x(seg.x0)), px(f.y(seg.y0)), px(f.x(seg.x1)), px(f.y(seg.y1)));

  const struct {
    const char* name;
    const char* tag;
    double x, y;
  } dots[] = {{"robustness", "R", rep.robustness, tru.robustness},
              {"geometric", "G", rep.geometric, tru.geometric},
              {"decisiveness", "D", rep.decisiveness, tru.decisiveness}};
  for (const auto& d : dots) {
    s += fmt::format(
        "<circle class=\"metric\" data-metric=\"{}\" data-reported=\"{}\" data-measured=\"{}\" cx=\"{}\" "
        "cy=\"{}\" r=\"5\" fill=\"#e01b1b\"/>\n",
        d.name, d.x, d.y, px(f.x(d.x)), px(f.y(d.y)));
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#e01b1b\">{}</text>\n", px(f.x(d.x) + 7),
                     px(f.y(d.y) - 7), d.tag);
  }
  s += "</g>\n";

  s += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">Reported probability</text>\n",
      px(f.left + f.size / 2), px(f.top + f.size + 42));
  s += fmt::format(
      "<text x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 {0} {1})\">"
      "Measured probability</text>\n",
      px(f.left - 48), px(f.top + f.size / 2));
  const std::string slope_text =
      report.slope.verdict == Verdict::undefined
          ? std::string("slope undefined")
          : fmt::format("slope {:.3f} ({})", report.slope.slope, to_string(report.slope.verdict));
  s += fmt::format("<text class=\"legend\" x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n", px(f.left + 8),
                   px(f.top + 18), slope_text);
  s += "</svg>\n";
  return s;
}

void render_reliability_svg(const MetricReport& report, std::ostream& out) {
  const auto text = reliability_svg(report);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("SVG write failure");
}

void render_reliability_svg(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  render_reliability_svg(report, out);
  out.close();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace decisive
