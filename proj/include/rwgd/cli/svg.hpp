#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rwgd::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = true;
  std::vector<Series> series;
};

// Points that are non-finite, or non-positive on a log axis, are skipped.
std::string render_svg(const Plot& plot);
void write_svg(const std::filesystem::path& path, const Plot& plot);

}  // namespace rwgd::cli
