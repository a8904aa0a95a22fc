#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

namespace deepproj {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = MatrixX<double>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Top-k eigenpairs of a symmetric matrix, eigenvalues sorted descending.
/// Column i of `vectors` pairs with `values(i)`.
struct SymEigenResult {
  Vector values;
  Eigen::MatrixXd vectors;
};

/// Largest k eigenpairs by algebraic value. Each eigenvector is signed so that
/// its largest-magnitude component (lowest index on ties) is positive.
/// Throws ShapeError for non-square or asymmetric input, ParameterError for a
/// bad k and ConvergenceError if the solver does not converge.
SymEigenResult sym_eigen(const Eigen::Ref<const Eigen::MatrixXd>& a, Index k);

/// Smallest k eigenpairs, eigenvalues sorted ascending. Same sign convention.
SymEigenResult sym_eigen_smallest(const Eigen::Ref<const Eigen::MatrixXd>& a, Index k);

/// d(i,j) = |x_i - x_j|^2, each unordered pair computed once.
template <typename Derived>
MatrixX<typename Derived::Scalar> pairwise_sq_dists(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.rows();
  MatrixX<Scalar> d = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Scalar v = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

/// Exact k-nearest neighbors of every row, excluding the row itself.
/// Neighbors are ordered by distance, ties broken by smaller row index.
struct KnnResult {
  IndexMatrix indices;   // rows x k
  Matrix distances;      // Euclidean, same layout
};

KnnResult knn(const Eigen::Ref<const Matrix>& x, Index k);

struct Edge {
  Index to;
  double weight;
};

/// Undirected weighted graph as adjacency lists.
struct WeightedGraph {
  std::vector<std::vector<Edge>> adjacency;

  Index size() const { return static_cast<Index>(adjacency.size()); }
  void add_edge(Index a, Index b, double w);
};

/// Symmetrized kNN graph: i~j when either is among the other's neighbors.
WeightedGraph knn_graph(const KnnResult& neighbors);

/// Sizes of connected components, largest first.
std::vector<std::size_t> connected_components(const WeightedGraph& g);

/// All-pairs shortest path lengths (Dijkstra from every node). Unreachable
/// pairs hold +infinity and are reported through `component_sizes`.
struct ShortestPaths {
  Matrix distances;
  std::vector<std::size_t> component_sizes;

  bool connected() const { return component_sizes.size() <= 1; }
};

ShortestPaths graph_shortest_paths(const WeightedGraph& g);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

}  // namespace deepproj
