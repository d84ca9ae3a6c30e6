#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <sstream>
#include <string>

#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// Minimal 2-D SVG canvas. Data coordinates are mapped into the viewport from
/// a fixed bounding box; y points up.
class SvgCanvas {
 public:
  SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width = 480,
            int height = 480);

  /// Bounding box of the first two coordinates, padded by 5%.
  static SvgCanvas fit(const PointCloud& cloud, int width = 480, int height = 480);

  void scatter(const PointCloud& cloud, double radius = 2.0, const std::string& color = "",
               double opacity = 0.8);
  void polyline(const PointCloud& path, const std::string& color = "#000000", double width = 1.5);
  /// Filled cells coloured by `cell_class(x, y)` on an nx x ny grid.
  void heat_grid(int nx, int ny, const std::function<int(double, double)>& cell_class,
                 double opacity = 0.25);
  void title(const std::string& text);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

  /// Fixed categorical palette indexed by class label.
  static std::string class_color(int label);

 private:
  std::array<double, 2> map(double x, double y) const;

  double x_min_, x_max_, y_min_, y_max_;
  int width_, height_;
  std::ostringstream body_;
};

}  // namespace pmaug
