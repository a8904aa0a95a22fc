#pragma once

#include "deepproj/data.hpp"
#include "deepproj/numerics.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace deepproj {

inline constexpr std::array<std::string_view, 10> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct PlotSpec {
  int width = 600;
  int height = 600;
  double point_radius = 2.0;
  std::string title;
};

/// Color for a label; labels beyond the palette cycle, negatives map by magnitude.
std::string_view label_color(int label);

/// SVG document with one <circle> per point, coordinates fitted to the canvas
/// with a 5% margin. Output is a pure function of the inputs.
std::string scatter_svg(const Eigen::Ref<const Matrix>& coords, std::span<const int> labels,
                        const PlotSpec& spec = {});

/// Throws IoError when the file cannot be written.
void render_scatter(const Eigen::Ref<const Matrix>& coords, const std::optional<Labels>& labels,
                    const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace deepproj
