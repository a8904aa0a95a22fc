#include "deepproj/plot.hpp"

#include "deepproj/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace deepproj {
namespace {

std::string escape_xml(std::string_view s) {
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

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string_view label_color(int label) {
  const auto idx = static_cast<std::size_t>(std::abs(static_cast<long>(label))) % kPalette.size();
  return kPalette[idx];
}

std::string scatter_svg(const Eigen::Ref<const Matrix>& coords, std::span<const int> labels,
                        const PlotSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw ParameterError("plot: canvas size must be positive");
  if (coords.cols() != 2) throw ShapeError("plot: embedding must have two columns");
  if (!coords.allFinite()) throw ParameterError("plot: embedding contains non-finite values");
  if (!labels.empty() && static_cast<Index>(labels.size()) != coords.rows())
    throw ShapeError("plot: label count does not match point count");

  const double w = spec.width, h = spec.height;
  const double mx = 0.05 * w, my = 0.05 * h;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (coords.rows() > 0) {
    x0 = coords.col(0).minCoeff();
    x1 = coords.col(0).maxCoeff();
    y0 = coords.col(1).minCoeff();
    y1 = coords.col(1).maxCoeff();
  }
  auto map = [](double v, double lo, double hi, double margin, double extent) {
    if (hi <= lo) return extent / 2.0;
    return margin + (v - lo) / (hi - lo) * (extent - 2.0 * margin);
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) + "\">\n";
  if (!spec.title.empty()) out += "<title>" + escape_xml(spec.title) + "</title>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  const std::string r = fixed2(spec.point_radius);
  for (Index i = 0; i < coords.rows(); ++i) {
    const double cx = map(coords(i, 0), x0, x1, mx, w);
    // SVG y grows downwards.
    const double cy = h - map(coords(i, 1), y0, y1, my, h);
    const std::string_view fill = labels.empty() ? kPalette[0] : label_color(labels[i]);
    out += "<circle cx=\"" + fixed2(cx) + "\" cy=\"" + fixed2(cy) + "\" r=\"" + r + "\" fill=\"";
    out += fill;
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

void render_scatter(const Eigen::Ref<const Matrix>& coords, const std::optional<Labels>& labels,
                    const PlotSpec& spec, const std::filesystem::path& path) {
  const std::string svg =
      scatter_svg(coords, labels ? std::span<const int>(*labels) : std::span<const int>(), spec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace deepproj
