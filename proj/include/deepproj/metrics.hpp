#pragma once

#include "deepproj/data.hpp"
#include "deepproj/numerics.hpp"
#include "deepproj/projections.hpp"

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace deepproj {

/// Default neighborhood size for the neighborhood hit.
inline constexpr Index kDefaultHitK = 6;

struct DisplacementStats {
  double mean = 0.0;
  double max = 0.0;
};

struct MetricReport {
  double neighborhood_hit = 0.0;
  Index k = 0;
  std::vector<double> per_point;
  std::optional<DisplacementStats> displacement;
};

/// Mean over points of the fraction of their k nearest embedding neighbors
/// (self excluded, ties by lower index) sharing the point's label.
MetricReport neighborhood_hit(const Eigen::Ref<const Matrix>& coords, std::span<const int> labels,
                              Index k = kDefaultHitK);

/// Per-row Euclidean displacement between two embeddings over the given rows.
/// Both embeddings are expected in the same [0,1]^2 frame; no rescaling.
DisplacementStats stability_displacement(const Eigen::Ref<const Matrix>& a,
                                         const Eigen::Ref<const Matrix>& b,
                                         std::span<const Index> shared_rows);

/// Min-max scales each axis to [0,1].
Matrix normalize_embedding(const Eigen::Ref<const Matrix>& coords);

struct KlSummary {
  double initial = 0.0;
  double final = 0.0;
  double min = 0.0;
  bool decreased = false;  // final < initial
};

KlSummary kl_summary(std::span<const double> history);

/// Disparity after optimal translation, rotation/reflection and uniform
/// scaling, with both sets centered and scaled to unit Frobenius norm.
/// Zero means identical up to a similarity transform.
double procrustes_residual(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

/// `metric,value` lines followed by `point,hit` rows.
void write_metric_csv(const MetricReport& r, std::ostream& out);
std::string format_metric_report(const MetricReport& r);

}  // namespace deepproj
