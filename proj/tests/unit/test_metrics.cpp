#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <sstream>

using namespace deepproj;
using test::random_matrix;

namespace {

std::vector<double> naive_hits(const Matrix& y, const Labels& labels, Index k) {
  std::vector<double> hits;
  for (Index i = 0; i < y.rows(); ++i) {
    std::vector<std::pair<double, Index>> order;
    for (Index j = 0; j < y.rows(); ++j)
      if (j != i) order.emplace_back((y.row(i) - y.row(j)).squaredNorm(), j);
    std::sort(order.begin(), order.end());
    int same = 0;
    for (Index m = 0; m < k; ++m) same += labels[static_cast<std::size_t>(order[m].second)] == labels[static_cast<std::size_t>(i)];
    hits.push_back(static_cast<double>(same) / static_cast<double>(k));
  }
  return hits;
}

Labels random_labels(Index n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  Labels l;
  for (Index i = 0; i < n; ++i) l.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
  return l;
}

Matrix similarity(const Matrix& y, double angle, double scale, double dx, double dy, bool reflect) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  if (reflect) r.col(0) *= -1.0;
  Matrix out = scale * y * r.transpose();
  out.col(0).array() += dx;
  out.col(1).array() += dy;
  return out;
}

// Disparity by scanning rotation angles for both orientations.
double procrustes_by_scan(Matrix a, Matrix b) {
  for (Matrix* m : {&a, &b}) {
    *m = m->rowwise() - m->colwise().mean();
    *m /= m->norm();
  }
  double best = 0.0;
  const int steps = 200000;
  for (bool reflect : {false, true}) {
    for (int s = 0; s < steps; ++s) {
      const double angle = 2.0 * std::numbers::pi * s / steps;
      const Matrix rb = similarity(b, angle, 1.0, 0.0, 0.0, reflect);
      best = std::max(best, (a.array() * rb.array()).sum());
    }
  }
  return 1.0 - best * best;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("neighborhood hit matches a full sort") {
    const Matrix y = random_matrix(60, 2, 3);
    const Labels labels = random_labels(60, 3, 4);
    for (Index k : {1, 6, 20}) {
      const MetricReport r = neighborhood_hit(y, labels, k);
      const auto oracle = naive_hits(y, labels, k);
      CHECK(r.k == k);
      double mean = 0.0;
      for (Index i = 0; i < 60; ++i) {
        CHECK(r.per_point[static_cast<std::size_t>(i)] == oracle[static_cast<std::size_t>(i)]);
        mean += oracle[static_cast<std::size_t>(i)];
      }
      CHECK(r.neighborhood_hit == doctest::Approx(mean / 60.0).epsilon(1e-14));
    }
  }

  TEST_CASE("neighborhood hit on hand-built layouts") {
    Matrix y(4, 2);
    y << 0, 0, 0.1, 0, 5, 0, 5.1, 0;
    CHECK(neighborhood_hit(y, Labels{0, 0, 1, 1}, 1).neighborhood_hit == 1.0);
    CHECK(neighborhood_hit(y, Labels{0, 1, 0, 1}, 1).neighborhood_hit == 0.0);
    CHECK(neighborhood_hit(y, Labels{0, 0, 1, 1}, 3).neighborhood_hit == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(neighborhood_hit(y, Labels{0, 0, 1, 1}, 4), ParameterError);
    CHECK_THROWS_AS(neighborhood_hit(y, Labels{0, 0, 1}, 1), ParameterError);
  }

  TEST_CASE("neighborhood hit is invariant under similarity transforms") {
    const Matrix y = random_matrix(100, 2, 8);
    const Labels labels = random_labels(100, 4, 9);
    const double base = neighborhood_hit(y, labels, 6).neighborhood_hit;
    CHECK(base > 0.0);
    CHECK(base < 1.0);
    CHECK(neighborhood_hit(similarity(y, 0.7, 3.5, -2.0, 10.0, false), labels, 6).neighborhood_hit == base);
    CHECK(neighborhood_hit(similarity(y, 2.1, 0.01, 5.0, 1.0, true), labels, 6).neighborhood_hit == base);
  }

  TEST_CASE("stability displacement") {
    const Matrix a = random_matrix(10, 2, 1);
    Matrix b = a;
    b.col(0).array() += 0.3;
    b.col(1).array() += 0.4;
    const std::vector<Index> rows{0, 3, 7};
    const DisplacementStats s = stability_displacement(a, b, rows);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.max == doctest::Approx(0.5));
    CHECK(stability_displacement(a, a, rows).max == 0.0);
    CHECK_THROWS_AS(stability_displacement(a, b, std::vector<Index>{}), ParameterError);
    CHECK_THROWS_AS(stability_displacement(a, b, std::vector<Index>{10}), ParameterError);
  }

  TEST_CASE("procrustes residual") {
    const Matrix a = random_matrix(30, 2, 5);
    CHECK(procrustes_residual(a, similarity(a, 1.3, 4.0, 7.0, -3.0, false)) < 1e-12);
    CHECK(procrustes_residual(a, similarity(a, 0.2, 0.5, 1.0, 1.0, true)) < 1e-12);
    const Matrix b = random_matrix(30, 2, 6);
    const double r = procrustes_residual(a, b);
    CHECK(r == doctest::Approx(procrustes_by_scan(a, b)).epsilon(1e-6));
    CHECK(r > 0.1);
    CHECK(r <= 1.0);
    CHECK_THROWS_AS(procrustes_residual(a, b.topRows(5)), ShapeError);
  }

  TEST_CASE("kl summary and normalization") {
    const std::vector<double> h{3.0, 2.0, 2.5, 1.0};
    const KlSummary s = kl_summary(h);
    CHECK(s.initial == 3.0);
    CHECK(s.final == 1.0);
    CHECK(s.min == 1.0);
    CHECK(s.decreased);
    CHECK_THROWS_AS(kl_summary(std::vector<double>{}), ParameterError);
    const Matrix n = normalize_embedding(random_matrix(20, 2, 2, 40.0));
    CHECK(n.colwise().minCoeff().isZero());
    CHECK(n.colwise().maxCoeff().isOnes());
  }

  TEST_CASE("report serialization") {
    Matrix y(3, 2);
    y << 0, 0, 1, 0, 9, 9;
    MetricReport r = neighborhood_hit(y, Labels{1, 1, 2}, 1);
    r.displacement = DisplacementStats{0.25, 0.5};
    std::ostringstream csv;
    write_metric_csv(r, csv);
    CHECK(csv.str().rfind("metric,value\n", 0) == 0);
    CHECK(csv.str().find("neighborhood_hit,0.66666666666666663\n") != std::string::npos);
    CHECK(csv.str().find("point,hit\n0,1\n1,1\n2,0\n") != std::string::npos);
    CHECK(format_metric_report(r).find("displacement") != std::string::npos);
  }
}
