#include "deepproj/numerics.hpp"

#include "deepproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace deepproj {
namespace {

std::string describe_components(const std::vector<std::size_t>& sizes) {
  std::ostringstream os;
  os << "neighbor graph is disconnected: " << sizes.size() << " components of sizes ";
  for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "," : "") << sizes[i];
  os << "; increase the neighbor count";
  return os.str();
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                                      Index k) {
  if (a.rows() != a.cols()) throw ShapeError("sym_eigen: matrix is not square");
  if (k < 1 || k > a.rows()) throw ParameterError("sym_eigen: k out of range");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (((a - a.transpose()).cwiseAbs().array() > 1e-10 * scale).any())
    throw ShapeError("sym_eigen: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("sym_eigen: eigensolver did not converge");
  return solver;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Index pivot = 0;
  double best = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      pivot = i;
    }
  }
  if (v(pivot) < 0) v = -v;
}

}  // namespace

DisconnectedGraphError::DisconnectedGraphError(std::vector<std::size_t> component_sizes)
    : Error(describe_components(component_sizes)),
      component_sizes_(std::move(component_sizes)) {}

SymEigenResult sym_eigen(const Eigen::Ref<const Eigen::MatrixXd>& a, Index k) {
  const auto solver = solve(a, k);
  const Index n = a.rows();
  // Eigen returns ascending order.
  SymEigenResult out{Vector(k), Eigen::MatrixXd(n, k)};
  for (Index i = 0; i < k; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    fix_sign(out.vectors.col(i));
  }
  return out;
}

SymEigenResult sym_eigen_smallest(const Eigen::Ref<const Eigen::MatrixXd>& a, Index k) {
  const auto solver = solve(a, k);
  SymEigenResult out{solver.eigenvalues().head(k), solver.eigenvectors().leftCols(k)};
  for (Index i = 0; i < k; ++i) fix_sign(out.vectors.col(i));
  return out;
}

KnnResult knn(const Eigen::Ref<const Matrix>& x, Index k) {
  const Index n = x.rows();
  if (k < 1 || k >= n) throw ParameterError("knn: k must satisfy 1 <= k < rows");
  KnnResult out{IndexMatrix(n, k), Matrix(n, k)};

  // (squared distance, index) ordered lexicographically gives the tie-break rule.
  using Candidate = std::pair<double, Index>;
  std::vector<Candidate> best;
  best.reserve(static_cast<std::size_t>(k) + 1);
  for (Index i = 0; i < n; ++i) {
    best.clear();
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Candidate c{(x.row(i) - x.row(j)).squaredNorm(), j};
      if (static_cast<Index>(best.size()) == k && !(c < best.back())) continue;
      auto pos = std::upper_bound(best.begin(), best.end(), c);
      best.insert(pos, c);
      if (static_cast<Index>(best.size()) > k) best.pop_back();
    }
    for (Index m = 0; m < k; ++m) {
      out.indices(i, m) = best[m].second;
      out.distances(i, m) = std::sqrt(best[m].first);
    }
  }
  return out;
}

void WeightedGraph::add_edge(Index a, Index b, double w) {
  adjacency[a].push_back({b, w});
  adjacency[b].push_back({a, w});
}

WeightedGraph knn_graph(const KnnResult& neighbors) {
  const Index n = neighbors.indices.rows();
  WeightedGraph g;
  g.adjacency.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < neighbors.indices.cols(); ++m) {
      const Index j = neighbors.indices(i, m);
      auto& adj = g.adjacency[i];
      const bool seen = std::any_of(adj.begin(), adj.end(), [j](const Edge& e) { return e.to == j; });
      if (!seen) g.add_edge(i, j, neighbors.distances(i, m));
    }
  }
  for (auto& adj : g.adjacency)
    std::sort(adj.begin(), adj.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
  return g;
}

std::vector<std::size_t> connected_components(const WeightedGraph& g) {
  const Index n = g.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> sizes;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::size_t count = 0;
    stack.push_back(s);
    seen[s] = true;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      ++count;
      for (const Edge& e : g.adjacency[u]) {
        if (!seen[e.to]) {
          seen[e.to] = true;
          stack.push_back(e.to);
        }
      }
    }
    sizes.push_back(count);
  }
  std::stable_sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

ShortestPaths graph_shortest_paths(const WeightedGraph& g) {
  const Index n = g.size();
  for (const auto& adj : g.adjacency)
    for (const Edge& e : adj)
      if (!(e.weight >= 0.0)) throw ParameterError("graph_shortest_paths: negative edge weight");

  ShortestPaths out{Matrix::Constant(n, n, kUnreachable), connected_components(g)};
  using Item = std::pair<double, Index>;
  std::vector<double> dist(n);
  for (Index s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kUnreachable);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[s] = 0.0;
    queue.push({0.0, s});
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      for (const Edge& e : g.adjacency[u]) {
        const double nd = d + e.weight;
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          queue.push({nd, e.to});
        }
      }
    }
    for (Index t = 0; t < n; ++t) out.distances(s, t) = dist[t];
  }
  // Path sums may differ in the last bit between directions; keep the upper triangle.
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) out.distances(j, i) = out.distances(i, j);
  return out;
}

}  // namespace deepproj
