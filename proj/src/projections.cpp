#include "deepproj/projections.hpp"

#include "deepproj/error.hpp"

#include <fstream>
#include <sstream>

namespace deepproj {
namespace {

void check_cap(Index n, std::string_view method) {
  if (n > kDenseEigenCap)
    throw ParameterError(std::string(method) + ": " + std::to_string(n) +
                         " points exceeds the dense eigensolver cap of " +
                         std::to_string(kDenseEigenCap) + "; subsample the input");
}

Eigen::MatrixXd double_center(const Eigen::Ref<const Matrix>& sq) {
  const Vector row_mean = sq.rowwise().mean();
  const RowVector col_mean = sq.colwise().mean();
  const double mean = sq.mean();
  Eigen::MatrixXd b(sq.rows(), sq.cols());
  for (Index i = 0; i < sq.rows(); ++i)
    for (Index j = 0; j < sq.cols(); ++j)
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + mean);
  // Exact symmetry for the eigensolver's check.
  return (0.5 * (b + b.transpose())).eval();
}

}  // namespace

// ---------------------------------------------------------------- PCA

Embedding PcaResult::transform(const Eigen::Ref<const Matrix>& x) const {
  if (x.cols() != mean.size()) throw ShapeError("PCA transform: column count mismatch");
  return {(x.rowwise() - mean) * components};
}

PcaResult pca_project(const Eigen::Ref<const Matrix>& x) {
  const Index n = x.rows();
  if (n < 2) throw ParameterError("pca_project: need at least 2 rows");
  PcaResult r;
  r.mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - r.mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = (0.5 * (cov + cov.transpose())).eval();
  const Index k = std::min<Index>(2, x.cols());
  const auto eig = sym_eigen(cov, k);
  r.components = Matrix::Zero(x.cols(), 2);
  r.variances = Vector::Zero(2);
  r.components.leftCols(k) = eig.vectors;
  r.variances.head(k) = eig.values;
  r.embedding.coords = centered * r.components;
  return r;
}

// ---------------------------------------------------------------- MDS / Isomap

Embedding classical_mds(const Eigen::Ref<const Matrix>& sq_dists) {
  const Index n = sq_dists.rows();
  if (n != sq_dists.cols()) throw ShapeError("classical_mds: distance matrix is not square");
  if (n < 2) throw ParameterError("classical_mds: need at least 2 points");
  const auto eig = sym_eigen(double_center(sq_dists), std::min<Index>(2, n));
  Embedding e{Matrix::Zero(n, 2)};
  for (Index c = 0; c < eig.values.size(); ++c)
    e.coords.col(c) = eig.vectors.col(c) * std::sqrt(std::max(eig.values(c), 0.0));
  return e;
}

Embedding mds_project(const Eigen::Ref<const Matrix>& x) {
  check_cap(x.rows(), "mds");
  return classical_mds(pairwise_sq_dists(x));
}

Embedding isomap_project(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg) {
  check_cap(x.rows(), "isomap");
  if (cfg.k < 2 || cfg.k >= x.rows()) throw ParameterError("isomap: k must satisfy 2 <= k < N");
  const auto paths = graph_shortest_paths(knn_graph(knn(x, cfg.k)));
  if (!paths.connected()) throw DisconnectedGraphError(paths.component_sizes);
  return classical_mds(paths.distances.array().square().matrix());
}

// ---------------------------------------------------------------- LLE

Matrix lle_weights(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg) {
  const Index n = x.rows();
  if (cfg.k < 2 || cfg.k >= n) throw ParameterError("lle: k must satisfy 2 <= k < N");
  const auto nb = knn(x, cfg.k);
  Matrix w = Matrix::Zero(n, n);
  Matrix local(cfg.k, x.cols());
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < cfg.k; ++m) local.row(m) = x.row(nb.indices(i, m)) - x.row(i);
    Eigen::MatrixXd gram = local * local.transpose();
    const double trace = gram.trace();
    gram.diagonal().array() += trace > 0.0 ? cfg.lle_regularization * trace : cfg.lle_regularization;
    Vector weights = gram.ldlt().solve(Vector::Ones(cfg.k));
    if (!weights.allFinite()) weights = gram.colPivHouseholderQr().solve(Vector::Ones(cfg.k));
    weights /= weights.sum();
    for (Index m = 0; m < cfg.k; ++m) w(i, nb.indices(i, m)) = weights(m);
  }
  return w;
}

Embedding lle_project(const Eigen::Ref<const Matrix>& x, const NeighborGraphConfig& cfg) {
  check_cap(x.rows(), "lle");
  const Index n = x.rows();
  if (n < 4) throw ParameterError("lle: need at least 4 points");
  const Matrix w = lle_weights(x, cfg);
  Eigen::MatrixXd residual = Eigen::MatrixXd::Identity(n, n) - w;
  Eigen::MatrixXd m = residual.transpose() * residual;
  m = (0.5 * (m + m.transpose())).eval();
  const auto eig = sym_eigen_smallest(m, 3);
  // Column 0 is the constant vector (eigenvalue 0).
  return {eig.vectors.rightCols(2)};
}

// ---------------------------------------------------------------- I/O

void save_embedding_csv(const Embedding& e, const std::optional<Labels>& labels,
                        const std::filesystem::path& path) {
  Dataset d{e.coords, labels, {"x", "y"}};
  save_csv(d, path);
}

LabeledEmbedding load_embedding_csv(const std::filesystem::path& path) {
  CsvOptions opts;
  opts.has_header = true;
  // Peek at the header to decide whether a label column exists.
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.find("label") != std::string::npos) opts.label_column = std::string("label");
  Dataset d = load_csv(path, opts);
  if (d.dims() != 2)
    throw ParseError(1, "embedding file must have exactly two coordinate columns");
  return {{d.features}, d.labels};
}

// ---------------------------------------------------------------- dispatch

std::string_view method_name(Method m) {
  switch (m) {
    case Method::pca: return "pca";
    case Method::mds: return "mds";
    case Method::isomap: return "isomap";
    case Method::lle: return "lle";
    case Method::tsne: return "tsne";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::pca, Method::mds, Method::isomap, Method::lle, Method::tsne})
    if (method_name(m) == name) return m;
  throw ParameterError("unknown projection method '" + std::string(name) + "'");
}

namespace {

class FunctionProjector final : public Projector {
 public:
  FunctionProjector(Method m, ProjectionParams params) : method_(m), params_(std::move(params)) {}
  std::string_view name() const override { return method_name(method_); }
  Embedding project(const Eigen::Ref<const Matrix>& x) const override {
    switch (method_) {
      case Method::pca: return pca_project(x).embedding;
      case Method::mds: return mds_project(x);
      case Method::isomap: return isomap_project(x, params_.graph);
      case Method::lle: return lle_project(x, params_.graph);
      case Method::tsne: return tsne_project(x, params_.tsne).embedding;
    }
    throw ParameterError("unknown projection method");
  }

 private:
  Method method_;
  ProjectionParams params_;
};

}  // namespace

std::unique_ptr<Projector> make_projector(Method m, const ProjectionParams& params) {
  return std::make_unique<FunctionProjector>(m, params);
}

}  // namespace deepproj
