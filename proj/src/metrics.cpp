#include "deepproj/metrics.hpp"

#include "deepproj/error.hpp"

#include <algorithm>
#include <sstream>

namespace deepproj {

MetricReport neighborhood_hit(const Eigen::Ref<const Matrix>& coords, std::span<const int> labels,
                              Index k) {
  const Index n = coords.rows();
  if (static_cast<Index>(labels.size()) != n)
    throw ParameterError("neighborhood_hit: labels are missing or do not match the embedding");
  if (k < 1 || k >= n) throw ParameterError("neighborhood_hit: k must satisfy 1 <= k < N");
  const auto nb = knn(coords, k);
  MetricReport r;
  r.k = k;
  r.per_point.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    Index same = 0;
    for (Index m = 0; m < k; ++m) same += labels[nb.indices(i, m)] == labels[i];
    r.per_point[i] = static_cast<double>(same) / static_cast<double>(k);
    total += r.per_point[i];
  }
  r.neighborhood_hit = total / static_cast<double>(n);
  return r;
}

DisplacementStats stability_displacement(const Eigen::Ref<const Matrix>& a,
                                         const Eigen::Ref<const Matrix>& b,
                                         std::span<const Index> shared_rows) {
  if (shared_rows.empty()) throw ParameterError("stability_displacement: no shared rows");
  if (a.cols() != b.cols()) throw ShapeError("stability_displacement: dimension mismatch");
  DisplacementStats s;
  for (Index row : shared_rows) {
    if (row < 0 || row >= a.rows() || row >= b.rows())
      throw ParameterError("stability_displacement: shared row out of range");
    const double d = (a.row(row) - b.row(row)).norm();
    s.mean += d;
    s.max = std::max(s.max, d);
  }
  s.mean /= static_cast<double>(shared_rows.size());
  return s;
}

Matrix normalize_embedding(const Eigen::Ref<const Matrix>& coords) {
  return fit_minmax(coords).apply(coords);
}

KlSummary kl_summary(std::span<const double> history) {
  if (history.empty()) throw ParameterError("kl_summary: empty history");
  KlSummary s;
  s.initial = history.front();
  s.final = history.back();
  s.min = *std::min_element(history.begin(), history.end());
  s.decreased = s.final < s.initial;
  return s;
}

double procrustes_residual(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("procrustes: shape mismatch");
  Eigen::MatrixXd x = a.rowwise() - a.colwise().mean();
  Eigen::MatrixXd y = b.rowwise() - b.colwise().mean();
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return nx == ny ? 0.0 : 1.0;
  x /= nx;
  y /= ny;
  // Optimal rotation R = U V^T from the SVD of x^T y; optimal scale is the
  // nuclear norm s, leaving a residual of 1 - s^2.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.transpose() * y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s = svd.singularValues().sum();
  return std::max(0.0, 1.0 - s * s);
}

void write_metric_csv(const MetricReport& r, std::ostream& out) {
  out << "metric,value\n";
  out << "neighborhood_hit," << format_double(r.neighborhood_hit) << '\n';
  out << "k," << r.k << '\n';
  if (r.displacement) {
    out << "displacement_mean," << format_double(r.displacement->mean) << '\n';
    out << "displacement_max," << format_double(r.displacement->max) << '\n';
  }
  out << "point,hit\n";
  for (std::size_t i = 0; i < r.per_point.size(); ++i) out << i << ',' << format_double(r.per_point[i]) << '\n';
}

std::string format_metric_report(const MetricReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "neighborhood hit (k=" << r.k << "): " << std::fixed << r.neighborhood_hit << '\n';
  os << "points: " << r.per_point.size() << '\n';
  if (r.displacement)
    os << "displacement: mean " << r.displacement->mean << ", max " << r.displacement->max << '\n';
  return os.str();
}

}  // namespace deepproj
