#include "pmaug/svg.hpp"

#include <algorithm>
#include <limits>

#include "pmaug/errors.hpp"
#include "pmaug/io.hpp"

namespace pmaug {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

SvgCanvas::SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width), height_(height) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw ArgumentError("SvgCanvas: empty bounding box");
}

SvgCanvas SvgCanvas::fit(const PointCloud& cloud, int width, int height) {
  if (cloud.dim() < 2 || cloud.empty()) throw ArgumentError("SvgCanvas::fit: need 2-D points");
  double lo[2] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  double hi[2] = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < 2; ++j) {
      lo[j] = std::min(lo[j], cloud.point(i)[j]);
      hi[j] = std::max(hi[j], cloud.point(i)[j]);
    }
  for (int j = 0; j < 2; ++j) {
    const double pad = std::max(0.05 * (hi[j] - lo[j]), 1e-6);
    lo[j] -= pad;
    hi[j] += pad;
  }
  return SvgCanvas(lo[0], hi[0], lo[1], hi[1], width, height);
}

std::array<double, 2> SvgCanvas::map(double x, double y) const {
  return {(x - x_min_) / (x_max_ - x_min_) * width_,
          (1.0 - (y - y_min_) / (y_max_ - y_min_)) * height_};
}

std::string SvgCanvas::class_color(int label) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const int n = static_cast<int>(std::size(palette));
  return palette[((label % n) + n) % n];
}

void SvgCanvas::scatter(const PointCloud& cloud, double radius, const std::string& color,
                        double opacity) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = map(cloud.point(i)[0], cloud.point(i)[1]);
    const std::string fill =
        !color.empty() ? color : class_color(cloud.has_labels() ? cloud.label(i) : 0);
    body_ << "<circle cx=\"" << num(p[0]) << "\" cy=\"" << num(p[1]) << "\" r=\"" << num(radius)
          << "\" fill=\"" << fill << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
  }
}

void SvgCanvas::polyline(const PointCloud& path, const std::string& color, double width) {
  body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto p = map(path.point(i)[0], path.point(i)[1]);
    body_ << (i ? " " : "") << num(p[0]) << ',' << num(p[1]);
  }
  body_ << "\"/>\n";
}

void SvgCanvas::heat_grid(int nx, int ny, const std::function<int(double, double)>& cell_class,
                          double opacity) {
  const double cw = static_cast<double>(width_) / nx, ch = static_cast<double>(height_) / ny;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double x = x_min_ + (ix + 0.5) / nx * (x_max_ - x_min_);
      const double y = y_max_ - (iy + 0.5) / ny * (y_max_ - y_min_);
      body_ << "<rect x=\"" << num(ix * cw) << "\" y=\"" << num(iy * ch) << "\" width=\""
            << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\""
            << class_color(cell_class(x, y)) << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
    }
}

void SvgCanvas::title(const std::string& text) {
  body_ << "<text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" << escape(text)
        << "</text>\n";
}

std::string SvgCanvas::str() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
     << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
     << body_.str() << "</svg>\n";
  return os.str();
}

void SvgCanvas::save(const std::filesystem::path& path) const { write_text(str(), path); }

}  // namespace pmaug
