#include "epiident/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace epiident {

namespace {
constexpr double kMarginLeft = 60.0, kMarginRight = 15.0, kMarginTop = 30.0, kMarginBottom = 45.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace

SvgPlot::SvgPlot(double width, double height, const std::string& title)
    : width_(width), height_(height), title_(title) {}

void SvgPlot::set_range(double x_min, double x_max, double y_min, double y_max) {
  if (!(x_min < x_max) || !(y_min < y_max)) throw std::invalid_argument("bad SVG plot range");
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
  range_set_ = true;
}

double SvgPlot::px(double x) const {
  return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kMarginLeft - kMarginRight);
}

double SvgPlot::py(double y) const {
  return height_ - kMarginBottom -
         (y - y_min_) / (y_max_ - y_min_) * (height_ - kMarginTop - kMarginBottom);
}

void SvgPlot::add_line(const std::vector<std::pair<double, double>>& points,
                       const std::string& color, double stroke_width) {
  series_.push_back({"line", points, color, stroke_width});
}

void SvgPlot::add_scatter(const std::vector<std::pair<double, double>>& points,
                          const std::string& color, double radius) {
  series_.push_back({"scatter", points, color, radius});
}

void SvgPlot::add_hist(const std::vector<double>& values, int bins, const std::string& color) {
  if (values.empty() || bins < 1) return;
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  const double w = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<std::pair<double, double>> bars(bins, {0.0, 0.0});
  for (int b = 0; b < bins; ++b) bars[b].first = lo + (b + 0.5) * w;
  for (double v : values) {
    int b = hi > lo ? static_cast<int>((v - lo) / w) : 0;
    if (b >= bins) b = bins - 1;
    bars[b].second += 1.0;
  }
  Series s{"hist", bars, color, 0.0};
  s.extra[0] = w;
  series_.push_back(std::move(s));
}

void SvgPlot::add_ellipse(double cx, double cy, double rx, double ry, double rotation_rad,
                          const std::string& color) {
  Series s{"ellipse", {{cx, cy}}, color, 0.0};
  s.extra[0] = rx;
  s.extra[1] = ry;
  s.extra[2] = rotation_rad;
  series_.push_back(std::move(s));
}

void SvgPlot::add_marker(double x, double y, const std::string& color) {
  series_.push_back({"marker", {{x, y}}, color, 5.0});
}

void SvgPlot::set_labels(const std::string& x_label, const std::string& y_label) {
  x_label_ = x_label;
  y_label_ = y_label;
}

void SvgPlot::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write SVG: " + path.string());

  double x_min = x_min_, x_max = x_max_, y_min = y_min_, y_max = y_max_;
  if (!range_set_) {
    x_min = y_min = std::numeric_limits<double>::infinity();
    x_max = y_max = -std::numeric_limits<double>::infinity();
    for (const auto& s : series_) {
      for (const auto& [x, y] : s.points) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, s.kind == "hist" ? 0.0 : y);
        y_max = std::max(y_max, y);
      }
    }
    if (!(x_min < x_max)) {
      x_min -= 1;
      x_max += 1;
    }
    if (!(y_min < y_max)) {
      y_min -= 1;
      y_max += 1;
    }
    const double pad_x = 0.05 * (x_max - x_min), pad_y = 0.05 * (y_max - y_min);
    x_min -= pad_x;
    x_max += pad_x;
    y_min -= pad_y;
    y_max += pad_y;
  }
  const_cast<SvgPlot*>(this)->x_min_ = x_min;
  const_cast<SvgPlot*>(this)->x_max_ = x_max;
  const_cast<SvgPlot*>(this)->y_min_ = y_min;
  const_cast<SvgPlot*>(this)->y_max_ = y_max;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width_ / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << title_ << "</text>\n";

  // Axes with 5 ticks per side.
  out << "<line x1=\"" << px(x_min) << "\" y1=\"" << py(y_min) << "\" x2=\"" << px(x_max)
      << "\" y2=\"" << py(y_min) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << px(x_min) << "\" y1=\"" << py(y_min) << "\" x2=\"" << px(x_min)
      << "\" y2=\"" << py(y_max) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 4.0;
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << py(y_min) + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << num(xv) << "</text>\n";
    out << "<text x=\"" << px(x_min) - 6 << "\" y=\"" << py(yv) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << num(yv) << "</text>\n";
  }
  if (!x_label_.empty())
    out << "<text x=\"" << width_ / 2 << "\" y=\"" << height_ - 8
        << "\" text-anchor=\"middle\" font-size=\"11\">" << x_label_ << "</text>\n";
  if (!y_label_.empty())
    out << "<text x=\"14\" y=\"" << height_ / 2 << "\" text-anchor=\"middle\" font-size=\"11\" "
        << "transform=\"rotate(-90 14 " << height_ / 2 << ")\">" << y_label_ << "</text>\n";

  for (const auto& s : series_) {
    if (s.kind == "line") {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.size
          << "\" points=\"";
      for (const auto& [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
      out << "\"/>\n";
    } else if (s.kind == "scatter" || s.kind == "marker") {
      for (const auto& [x, y] : s.points)
        out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << s.size
            << "\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
    } else if (s.kind == "hist") {
      const double w = s.extra[0];
      for (const auto& [center, count] : s.points) {
        const double x0 = px(center - w / 2), x1 = px(center + w / 2);
        out << "<rect x=\"" << x0 << "\" y=\"" << py(count) << "\" width=\"" << x1 - x0
            << "\" height=\"" << py(0.0) - py(count) << "\" fill=\"" << s.color
            << "\" fill-opacity=\"0.7\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
      }
    } else if (s.kind == "ellipse") {
      const auto& [cx, cy] = s.points.front();
      // Approximate the data-space ellipse with a 64-gon, honoring rotation.
      out << "<polygon fill=\"none\" stroke=\"" << s.color
          << "\" stroke-dasharray=\"4 3\" points=\"";
      for (int k = 0; k < 64; ++k) {
        const double th = 2.0 * 3.14159265358979323846 * k / 64.0;
        const double u = s.extra[0] * std::cos(th), v = s.extra[1] * std::sin(th);
        const double c = std::cos(s.extra[2]), sn = std::sin(s.extra[2]);
        out << px(cx + c * u - sn * v) << ',' << py(cy + sn * u + c * v) << ' ';
      }
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace epiident
