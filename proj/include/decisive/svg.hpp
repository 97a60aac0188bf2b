#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "decisive/report.hpp"

namespace decisive {

/// Pixel geometry of the square data region; data (0,0) is bottom-left.
struct PlotFrame {
  double left = 80.0;
  double top = 56.0;
  double size = 480.0;
  double width = 600.0;
  double height = 616.0;

  double x(double data) const { return left + data * size; }
  double y(double data) const { return top + (1.0 - data) * size; }
};

/// Reliability diagram: one bar per bin over (lo, hi] with height f, the
/// identity line, (reported, measured) dots for robustness, geometric
/// accuracy and decisiveness, and the line through the robustness and
/// decisiveness dots.
std::string reliability_svg(const MetricReport& report, const PlotFrame& frame = {});

void render_reliability_svg(const MetricReport& report, std::ostream& out);
void render_reliability_svg(const MetricReport& report, const std::filesystem::path& path);

}  // namespace decisive
