#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace deepproj;
using test::random_matrix;
using test::random_symmetric;

namespace {

// Dominant eigenpairs by power iteration with deflation (positive definite input).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> power_deflation(Eigen::MatrixXd a, Index k) {
  Eigen::VectorXd values(k);
  Eigen::MatrixXd vectors(a.rows(), k);
  for (Index c = 0; c < k; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()) + 0.1 * Eigen::VectorXd::LinSpaced(a.rows(), 0, 1);
    v.normalize();
    double lambda = 0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd w = a * v;
      const double next = v.dot(w);
      v = w.normalized();
      if (std::abs(next - lambda) < 1e-15 * std::abs(next) && it > 50) break;
      lambda = next;
    }
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    values(c) = v.dot(a * v);
    vectors.col(c) = v;
    a -= values(c) * v * v.transpose();
  }
  return {values, vectors};
}

Eigen::MatrixXd well_separated_spd(Index n, std::uint64_t seed) {
  // Orthogonal basis with a geometric spectrum keeps power iteration fast.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(n, n, seed)));
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd spectrum(n);
  for (Index i = 0; i < n; ++i) spectrum(i) = std::pow(0.5, static_cast<double>(i)) * 10.0;
  return q * spectrum.asDiagonal() * q.transpose();
}

Matrix floyd_warshall(const WeightedGraph& g) {
  const Index n = g.size();
  Matrix d = Matrix::Constant(n, n, kUnreachable);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0;
    for (const Edge& e : g.adjacency[i]) d(i, e.to) = std::min(d(i, e.to), e.weight);
  }
  for (Index m = 0; m < n; ++m)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, m) + d(m, j));
  return d;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("sym_eigen agrees with power iteration and deflation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Eigen::MatrixXd a = well_separated_spd(8, seed);
      const auto [values, vectors] = power_deflation(a, 3);
      const SymEigenResult r = sym_eigen(a, 3);
      for (Index c = 0; c < 3; ++c) {
        CHECK(r.values(c) == doctest::Approx(values(c)).epsilon(1e-10));
        CHECK((r.vectors.col(c) - vectors.col(c)).norm() < 1e-7);
      }
    }
  }

  TEST_CASE("sym_eigen reconstructs the input") {
    for (Index n : {1, 2, 5, 16, 32}) {
      const Eigen::MatrixXd a = random_symmetric(n, static_cast<std::uint64_t>(n));
      const SymEigenResult r = sym_eigen(a, n);
      const Eigen::MatrixXd rebuilt = r.vectors * r.values.asDiagonal() * r.vectors.transpose();
      CHECK((rebuilt - a).norm() <= 1e-8 * std::max(1.0, a.norm()));
      CHECK((r.vectors.transpose() * r.vectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
      for (Index i = 1; i < n; ++i) CHECK(r.values(i - 1) >= r.values(i));
    }
  }

  TEST_CASE("sym_eigen sign convention and smallest pairs") {
    const Eigen::MatrixXd a = random_symmetric(12, 42);
    const SymEigenResult top = sym_eigen(a, 12);
    for (Index c = 0; c < 12; ++c) {
      Index arg = 0;
      top.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(top.vectors(arg, c) > 0);
    }
    const SymEigenResult low = sym_eigen_smallest(a, 3);
    for (Index c = 0; c < 3; ++c) {
      CHECK(low.values(c) == doctest::Approx(top.values(11 - c)).epsilon(1e-12));
      CHECK((low.vectors.col(c) - top.vectors.col(11 - c)).norm() < 1e-8);
    }
  }

  TEST_CASE("sym_eigen diagonal and repeated eigenvalues") {
    Eigen::MatrixXd d = Eigen::Vector3d(1.0, 3.0, 2.0).asDiagonal();
    const SymEigenResult r = sym_eigen(d, 3);
    CHECK(r.values(0) == 3.0);
    CHECK(r.values(1) == 2.0);
    CHECK(r.values(2) == 1.0);
    CHECK(r.vectors(1, 0) == doctest::Approx(1.0));

    const SymEigenResult id = sym_eigen(Eigen::MatrixXd::Identity(4, 4), 4);
    CHECK((id.vectors.transpose() * id.vectors - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  }

  TEST_CASE("sym_eigen rejects bad input") {
    CHECK_THROWS_AS(sym_eigen(Eigen::MatrixXd::Zero(2, 3), 1), ShapeError);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 2) = 1.0;
    CHECK_THROWS_AS(sym_eigen(asym, 1), ShapeError);
    CHECK_THROWS_AS(sym_eigen(Eigen::MatrixXd::Identity(3, 3), 0), ParameterError);
    CHECK_THROWS_AS(sym_eigen(Eigen::MatrixXd::Identity(3, 3), 4), ParameterError);
  }

  TEST_CASE("pairwise_sq_dists matches the naive double loop") {
    const Matrix x = random_matrix(17, 5, 7);
    const Matrix d = pairwise_sq_dists(x);
    for (Index i = 0; i < 17; ++i) {
      for (Index j = 0; j < 17; ++j) {
        double s = 0;
        for (Index c = 0; c < 5; ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
        CHECK(d(i, j) == doctest::Approx(s).epsilon(1e-14));
      }
    }
    CHECK(d == d.transpose());
    const MatrixX<float> f = pairwise_sq_dists(x.cast<float>());
    CHECK(f(0, 1) == doctest::Approx(d(0, 1)).epsilon(1e-5));
  }

  TEST_CASE("knn matches a full sort") {
    const Matrix x = random_matrix(40, 3, 9);
    const Matrix d = pairwise_sq_dists(x);
    const KnnResult r = knn(x, 6);
    for (Index i = 0; i < 40; ++i) {
      std::vector<std::pair<double, Index>> all;
      for (Index j = 0; j < 40; ++j)
        if (j != i) all.emplace_back(d(i, j), j);
      std::sort(all.begin(), all.end());
      for (Index c = 0; c < 6; ++c) {
        CHECK(r.indices(i, c) == all[c].second);
        CHECK(r.distances(i, c) == doctest::Approx(std::sqrt(all[c].first)));
      }
    }
  }

  TEST_CASE("knn breaks ties by lower index and validates k") {
    Matrix x(4, 1);
    x << 0.0, 1.0, -1.0, 1.0;
    const KnnResult r = knn(x, 3);
    CHECK(r.indices(0, 0) == 1);
    CHECK(r.indices(0, 1) == 2);
    CHECK(r.indices(0, 2) == 3);
    CHECK(r.indices(1, 0) == 3);
    CHECK(r.distances(1, 0) == 0.0);
    CHECK_THROWS_AS(knn(x, 4), ParameterError);
    CHECK_THROWS_AS(knn(x, 0), ParameterError);
  }

  TEST_CASE("graph shortest paths match Floyd-Warshall") {
    const Matrix x = random_matrix(30, 2, 11);
    const WeightedGraph g = knn_graph(knn(x, 4));
    for (Index i = 0; i < g.size(); ++i)
      for (const Edge& e : g.adjacency[i]) {
        const bool back = std::any_of(g.adjacency[e.to].begin(), g.adjacency[e.to].end(),
                                      [&](const Edge& b) { return b.to == i && b.weight == e.weight; });
        CHECK(back);
      }
    const ShortestPaths sp = graph_shortest_paths(g);
    const Matrix oracle = floyd_warshall(g);
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j) {
        if (std::isinf(oracle(i, j))) {
          CHECK(std::isinf(sp.distances(i, j)));
        } else {
          CHECK(sp.distances(i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-12));
        }
      }
  }

  TEST_CASE("disconnected graphs report components") {
    WeightedGraph g;
    g.adjacency.resize(5);
    g.add_edge(0, 1, 1.0);
    g.add_edge(1, 2, 2.0);
    g.add_edge(3, 4, 0.5);
    const ShortestPaths sp = graph_shortest_paths(g);
    CHECK_FALSE(sp.connected());
    CHECK(sp.component_sizes == std::vector<std::size_t>{3, 2});
    CHECK(sp.distances(0, 2) == 3.0);
    CHECK(std::isinf(sp.distances(0, 3)));
    CHECK(connected_components(g) == std::vector<std::size_t>{3, 2});
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are reproducible and distinct") {
    Rng a(5), b(5);
    bool same = true;
    for (int i = 0; i < 100; ++i) same = same && a.next_u64() == b.next_u64();
    CHECK(same);
    CHECK(Rng(5).next_u64() != Rng(6).next_u64());
    CHECK(Rng::derive(5, 1) != Rng::derive(5, 2));
    CHECK(Rng::derive(5, 1) == Rng::derive(5, 1));
  }

  TEST_CASE("draw ranges and moments") {
    Rng rng(1);
    double sum = 0, sq = 0;
    bool in_range = true;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      in_range = in_range && u >= 0.0 && u < 1.0;
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(in_range);
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      const auto v = rng.below(7);
      CHECK(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("shuffle permutes") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(3);
    rng.shuffle(std::span<int>(v));
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK_FALSE(std::is_sorted(v.begin(), v.end()));
  }
}
