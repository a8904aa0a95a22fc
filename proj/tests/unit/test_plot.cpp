#include "helpers.hpp"

#include <doctest.h>

#include <regex>
#include <set>
#include <stack>

using namespace deepproj;

namespace {

// Minimal well-formedness check: balanced elements and quoted attributes.
bool well_formed_xml(const std::string& doc) {
  std::stack<std::string> open;
  std::size_t pos = 0;
  bool root_seen = false;
  while ((pos = doc.find('<', pos)) != std::string::npos) {
    const std::size_t end = doc.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = doc.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (open.empty() || open.top() != tag.substr(1)) return false;
      open.pop();
      continue;
    }
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (open.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (tag.back() != '/') open.push(name);
  }
  return root_seen && open.empty();
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("plot") {
  TEST_CASE("one circle per point, deterministic and well formed") {
    const Matrix y = test::random_matrix(57, 2, 1);
    Labels labels;
    for (int i = 0; i < 57; ++i) labels.push_back(i % 10);
    PlotSpec spec;
    spec.title = "a < b & c";
    const std::string svg = scatter_svg(y, labels, spec);
    CHECK(count_of(svg, "<circle") == 57);
    CHECK(svg == scatter_svg(y, labels, spec));
    CHECK(well_formed_xml(svg));
    CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
    std::set<std::string> colors;
    const std::regex fill("fill=\"(#[0-9a-f]{6})\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill); it != std::sregex_iterator(); ++it)
      colors.insert((*it)[1]);
    colors.erase("#ffffff");
    CHECK(colors.size() == 10);
  }

  TEST_CASE("points stay inside the margins") {
    const Matrix y = test::random_matrix(40, 2, 2, 100.0);
    PlotSpec spec;
    spec.width = 200;
    spec.height = 100;
    const std::string svg = scatter_svg(y, {}, spec);
    const std::regex cx("cx=\"([0-9.-]+)\" cy=\"([0-9.-]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cx); it != std::sregex_iterator(); ++it) {
      const double x = std::stod((*it)[1]);
      const double v = std::stod((*it)[2]);
      CHECK(x >= 10.0 - 1e-9);
      CHECK(x <= 190.0 + 1e-9);
      CHECK(v >= 5.0 - 1e-9);
      CHECK(v <= 95.0 + 1e-9);
    }
  }

  TEST_CASE("palette and degenerate input") {
    CHECK(label_color(0) == kPalette[0]);
    CHECK(label_color(13) == kPalette[3]);
    CHECK(label_color(-2) == kPalette[2]);
    const Matrix same = Matrix::Ones(3, 2);
    CHECK(well_formed_xml(scatter_svg(same, Labels{0, 1, 2})));
    CHECK_THROWS(scatter_svg(same, Labels{0, 1}));
  }

  TEST_CASE("render to file") {
    test::TempDir dir("plot");
    render_scatter(Matrix::Identity(2, 2), std::nullopt, {}, dir / "p.svg");
    CHECK(well_formed_xml(test::read_file(dir / "p.svg")));
    CHECK_THROWS_AS(render_scatter(Matrix::Identity(2, 2), std::nullopt, {}, dir / "none/p.svg"), IoError);
  }
}
