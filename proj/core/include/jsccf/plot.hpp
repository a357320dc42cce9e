#pragma once

#include "jsccf/imaging.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace jsccf {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool line = true;
  bool markers = true;
  bool closed = false;  // join the last point back to the first
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 640;
  int height = 480;
};

// Evenly spaced round tick values inside [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target_count = 6);

// Rasterizes axes, ticks, labels, a legend and every series. Throws
// DomainError when no series has a finite point.
Image render_plot(const Plot& plot);
void save_plot_png(const Plot& plot, const std::filesystem::path& path);

// x,y rows per series: "series,x,y".
std::string plot_data_csv(const Plot& plot);

}  // namespace jsccf
