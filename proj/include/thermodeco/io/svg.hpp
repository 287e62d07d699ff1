#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace thermodeco::io {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Static line plot: frame, decade or linear ticks, one polyline per series
/// and a legend. Points that cannot be drawn (non-finite, or <= 0 on a log
/// axis) split the polyline.
std::string render_svg(const PlotSpec& plot);
void write_svg(const std::filesystem::path& path, const PlotSpec& plot);

}  // namespace thermodeco::io
