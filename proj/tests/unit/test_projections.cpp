#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace deepproj;
using test::random_matrix;

namespace {

Matrix embed_plane(Index n, Index dims, std::uint64_t seed, Matrix* plane_coords = nullptr) {
  const Matrix uv = random_matrix(n, 2, seed);
  const Matrix basis = random_matrix(2, dims, seed + 1);
  if (plane_coords) *plane_coords = uv;
  return uv * basis;
}

double max_distance_error(const Matrix& a, const Matrix& b) {
  return (pairwise_sq_dists(a).cwiseSqrt() - pairwise_sq_dists(b).cwiseSqrt()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("projections") {
  TEST_CASE("pca matches the thin SVD of the centered data") {
    const Matrix x = random_matrix(50, 6, 4) * Eigen::VectorXd::LinSpaced(6, 1, 6).asDiagonal();
    const PcaResult r = pca_project(x);
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    for (Index c = 0; c < 2; ++c) {
      const Vector oracle = svd.matrixU().col(c) * svd.singularValues()(c);
      CHECK(std::min((r.embedding.coords.col(c) - oracle).norm(), (r.embedding.coords.col(c) + oracle).norm()) < 1e-8);
      CHECK(r.variances(c) == doctest::Approx(svd.singularValues()(c) * svd.singularValues()(c) / 49.0));
    }
    CHECK((r.transform(x).coords - r.embedding.coords).norm() < 1e-10);
  }

  TEST_CASE("pca on degenerate inputs") {
    Matrix line(4, 3);
    line << 0, 0, 0, 1, 2, 3, 2, 4, 6, 3, 6, 9;
    const PcaResult r = pca_project(line);
    CHECK(r.variances(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(r.embedding.coords(3, 0) - r.embedding.coords(0, 0)) == doctest::Approx(3 * std::sqrt(14.0)));
    Matrix one_col(3, 1);
    one_col << 1, 2, 4;
    const PcaResult single = pca_project(one_col);
    CHECK(single.embedding.coords.col(1).isZero());
    CHECK_THROWS_AS(pca_project(Matrix::Zero(1, 3)), ParameterError);
  }

  TEST_CASE("classical mds of two points") {
    Matrix sq(2, 2);
    sq << 0, 9, 9, 0;
    const Embedding e = classical_mds(sq);
    CHECK(std::abs(e.coords(0, 0)) == doctest::Approx(1.5));
    CHECK(e.coords(0, 0) == doctest::Approx(-e.coords(1, 0)));
    CHECK(e.coords.col(1).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("classical mds of a unit square") {
    Matrix square(4, 2);
    square << 0, 0, 1, 0, 1, 1, 0, 1;
    const Embedding e = classical_mds(pairwise_sq_dists(square));
    CHECK(max_distance_error(e.coords, square) < 1e-10);
  }

  TEST_CASE("mds reproduces distances of planar data") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Matrix x = embed_plane(60, 7, seed);
      CHECK(max_distance_error(mds_project(x).coords, x) < 1e-6);
    }
  }

  TEST_CASE("isomap with a complete graph equals mds") {
    const Matrix x = random_matrix(40, 4, 8);
    const Embedding iso = isomap_project(x, {39, 1e-3});
    const Embedding mds = mds_project(x);
    CHECK(procrustes_residual(iso.coords, mds.coords) < 1e-6);
  }

  TEST_CASE("isomap unrolls a spiral") {
    const Index n = 300;
    Matrix x(n, 3);
    for (Index i = 0; i < n; ++i) {
      const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1));
      x.row(i) << t * std::cos(t), t * std::sin(t), 0.01 * static_cast<double>(i % 3);
    }
    const Embedding e = isomap_project(x, {6, 1e-3});
    const Vector first = e.coords.col(0);
    const double sign = first(n - 1) > first(0) ? 1.0 : -1.0;
    bool monotone = true;
    for (Index i = 1; i < n; ++i) monotone = monotone && sign * (first(i) - first(i - 1)) > 0.0;
    CHECK(monotone);
  }

  TEST_CASE("isomap reports disconnected graphs") {
    Matrix x = random_matrix(20, 2, 3, 0.1);
    x.bottomRows(8).array() += 100.0;
    try {
      (void)isomap_project(x, {3, 1e-3});
      FAIL("expected DisconnectedGraphError");
    } catch (const DisconnectedGraphError& e) {
      CHECK(e.component_sizes() == std::vector<std::size_t>{12, 8});
    }
    CHECK_THROWS_AS(isomap_project(x, {20, 1e-3}), ParameterError);
  }

  TEST_CASE("lle weights are affine and local") {
    const Matrix x = random_matrix(50, 4, 6);
    const NeighborGraphConfig cfg{7, 1e-3};
    const Matrix w = lle_weights(x, cfg);
    const KnnResult nb = knn(x, 7);
    for (Index i = 0; i < 50; ++i) {
      CHECK(std::abs(w.row(i).sum() - 1.0) <= 1e-10);
      CHECK(w(i, i) == 0.0);
      Index nonzero = 0;
      for (Index m = 0; m < 7; ++m) nonzero += w(i, nb.indices(i, m)) != 0.0;
      CHECK(nonzero == 7);
      CHECK((w.row(i).array() != 0.0).count() == 7);
    }
  }

  TEST_CASE("lle reconstructs points on a plane") {
    const Matrix x = embed_plane(80, 5, 12);
    const Matrix w = lle_weights(x, {6, 1e-9});
    const Matrix recon = w * x;
    CHECK((recon - x).rowwise().norm().maxCoeff() < 1e-6 * x.cwiseAbs().maxCoeff());
  }

  TEST_CASE("lle coordinates are bottom eigenvectors of the cost matrix") {
    const Matrix x = random_matrix(60, 3, 2);
    const NeighborGraphConfig cfg{8, 1e-3};
    const Embedding e = lle_project(x, cfg);
    const Eigen::MatrixXd residual = Eigen::MatrixXd::Identity(60, 60) - Eigen::MatrixXd(lle_weights(x, cfg));
    const Eigen::MatrixXd m = residual.transpose() * residual;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(m);
    for (Index c = 0; c < 2; ++c) {
      const Vector v = e.coords.col(c);
      CHECK(v.norm() == doctest::Approx(1.0));
      CHECK(std::abs(v.sum()) < 1e-8);
      const double lambda = v.dot(m * v);
      CHECK((m * v - lambda * v).norm() < 1e-8);
      CHECK(lambda == doctest::Approx(oracle.eigenvalues()(c + 1)).epsilon(1e-8));
    }
  }

  TEST_CASE("dense methods refuse inputs above the cap") {
    const Matrix big = Matrix::Zero(kDenseEigenCap + 1, 2);
    CHECK_THROWS_AS(mds_project(big), ParameterError);
    CHECK_THROWS_AS(isomap_project(big, {}), ParameterError);
    CHECK_THROWS_AS(lle_project(big, {}), ParameterError);
  }

  TEST_CASE("method dispatch") {
    for (Method m : {Method::pca, Method::mds, Method::isomap, Method::lle, Method::tsne})
      CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("umap"), ParameterError);
    const Matrix x = random_matrix(30, 3, 1);
    CHECK(make_projector(Method::pca)->project(x).coords == pca_project(x).embedding.coords);
    CHECK(make_projector(Method::mds)->name() == "mds");
  }

  TEST_CASE("embedding csv round trip") {
    test::TempDir dir("embedding_csv");
    const Embedding e{random_matrix(5, 2, 3)};
    save_embedding_csv(e, Labels{0, 1, 1, 0, 2}, dir / "e.csv");
    const LabeledEmbedding back = load_embedding_csv(dir / "e.csv");
    CHECK(back.embedding.coords == e.coords);
    CHECK(*back.labels == Labels{0, 1, 1, 0, 2});
    save_embedding_csv(e, std::nullopt, dir / "u.csv");
    CHECK_FALSE(load_embedding_csv(dir / "u.csv").labels.has_value());
  }
}
