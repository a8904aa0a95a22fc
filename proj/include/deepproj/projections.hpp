#pragma once

#include "deepproj/data.hpp"
#include "deepproj/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepproj {

/// N x 2 projected coordinates.
struct Embedding {
  Matrix coords;

  Index size() const { return coords.rows(); }
};

/// Writes `x,y[,label]` with a header line and 17-significant-digit values.
void save_embedding_csv(const Embedding& e, const std::optional<Labels>& labels,
                        const std::filesystem::path& path);

struct LabeledEmbedding {
  Embedding embedding;
  std::optional<Labels> labels;
};

LabeledEmbedding load_embedding_csv(const std::filesystem::path& path);

// ---- configuration ----

struct NeighborGraphConfig {
  Index k = 10;
  double lle_regularization = 1e-3;
};

struct TsneConfig {
  double perplexity = 30.0;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  Index momentum_switch = 250;
  Index n_iter = 1000;
  double exaggeration = 12.0;
  Index exaggeration_iters = 250;
  double init_stddev = 1e-4;
  /// KL divergence is evaluated on iterations that are multiples of this
  /// stride and on the final iteration.
  Index kl_every = 50;
  std::uint64_t seed = 0;
};

/// Dense-eigensolver methods (MDS, Isomap, LLE) refuse inputs above this size.
inline constexpr Index kDenseEigenCap = 4000;

// ---- techniques ----

struct PcaResult {
  Embedding embedding;
  RowVector mean;
  Matrix components;  // n x 2, columns are principal axes
  Vector variances;   // top-2 covariance eigenvalues

  /// Projects new rows with the stored mean and axes.
  Embedding transform(const Eigen::Ref<const Matrix>& x) const;
};

PcaResult pca_project(const Eigen::Ref<const Matrix>& x);

/// Classical MDS on a squared-distance matrix. Negative eigenvalues clamp to 0.
Embedding classical_mds(const Eigen::Ref<const Matrix>& sq_dists);

Embedding mds_project(const Eigen::Ref<const Matrix>& x);

/// Throws DisconnectedGraphError when the kNN graph is not connected.
Embedding isomap_project(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg);

/// Reconstruction weights: row i holds the weights of its k neighbors,
/// scattered into an N x N dense matrix. Rows sum to one.
Matrix lle_weights(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg);

Embedding lle_project(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg);

// ---- t-SNE ----

/// Joint affinities in packed upper-triangular storage (i < j).
class Affinities {
 public:
  Affinities() = default;
  explicit Affinities(Index n) : n_(n), values_(static_cast<std::size_t>(n * (n - 1) / 2), 0.0) {}

  Index size() const { return n_; }
  double& at(Index i, Index j) { return values_[offset(i, j)]; }
  double at(Index i, Index j) const { return i == j ? 0.0 : values_[offset(i, j)]; }
  /// Pointer to p(i, i+1) .. p(i, n-1).
  const double* row_tail(Index i) const { return values_.data() + offset(i, i + 1); }
  double* row_tail(Index i) { return values_.data() + offset(i, i + 1); }

  /// Sum over all ordered pairs i != j.
  double total() const;
  Matrix dense() const;

 private:
  std::size_t offset(Index i, Index j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * (2 * n_ - i - 1) / 2 + (j - i - 1));
  }
  Index n_ = 0;
  std::vector<double> values_;
};

struct PerplexityCalibration {
  Vector beta;       // precision 1/(2 sigma^2) per row
  Vector entropy;    // achieved Shannon entropy (nats) per row
  std::vector<Index> unconverged_rows;  // rows that hit the step bound
};

struct TsneAffinities {
  Affinities joint;
  PerplexityCalibration calibration;
};

inline constexpr int kPerplexitySearchSteps = 50;
inline constexpr double kEntropyTolerance = 1e-5;

/// Conditional Gaussian kernels calibrated to the target perplexity, then
/// symmetrized: p_ij = (p_j|i + p_i|j) / 2N.
TsneAffinities tsne_affinities(const Eigen::Ref<const Matrix>& x, double perplexity);

/// Row-stochastic conditional distribution p_{j|i} (dense, for inspection).
Matrix tsne_conditionals(const Eigen::Ref<const Matrix>& x, double perplexity,
                         PerplexityCalibration* calibration = nullptr);

struct TsneResult {
  Embedding embedding;
  std::vector<Index> kl_iterations;
  std::vector<double> kl_history;
  PerplexityCalibration calibration;
};

TsneResult tsne_project(const Eigen::Ref<const Matrix>& x, const TsneConfig& cfg);

// ---- uniform interface ----

enum class Method { pca, mds, isomap, lle, tsne };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct ProjectionParams {
  NeighborGraphConfig graph;
  TsneConfig tsne;
};

/// A projection technique: maps an N x n sample matrix to N x 2 coordinates.
class Projector {
 public:
  virtual ~Projector() = default;
  virtual std::string_view name() const = 0;
  virtual Embedding project(const Eigen::Ref<const Matrix>& x) const = 0;
};

std::unique_ptr<Projector> make_projector(Method m, const ProjectionParams& params = {});

}  // namespace deepproj
