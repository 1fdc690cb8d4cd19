#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace epiident {

/// Dependency-light SVG emitter with the three primitives the figure
/// pipeline needs: line series, scatter points, histogram bars. Axis ticks
/// are chosen from the data range.
class SvgPlot {
 public:
  SvgPlot(double width, double height, const std::string& title);

  void set_range(double x_min, double x_max, double y_min, double y_max);
  void add_line(const std::vector<std::pair<double, double>>& points, const std::string& color,
                double stroke_width = 1.5);
  void add_scatter(const std::vector<std::pair<double, double>>& points, const std::string& color,
                   double radius = 2.0);
  void add_hist(const std::vector<double>& values, int bins, const std::string& color);
  void add_ellipse(double cx, double cy, double rx, double ry, double rotation_rad,
                   const std::string& color);
  void add_marker(double x, double y, const std::string& color);
  void set_labels(const std::string& x_label, const std::string& y_label);

  void save(const std::filesystem::path& path) const;

 private:
  struct Series {
    std::string kind;
    std::vector<std::pair<double, double>> points;
    std::string color;
    double size;
    double extra[3] = {0, 0, 0};
  };
  double px(double x) const;
  double py(double y) const;

  double width_, height_;
  std::string title_, x_label_, y_label_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
  bool range_set_ = false;
  std::vector<Series> series_;
};

}  // namespace epiident
