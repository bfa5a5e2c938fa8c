#include "brl/geometry.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>

#include "brl/estimators.hpp"
#include "test_utils.hpp"

using namespace brl;
using test::random_matrix;
using test::random_vector;

namespace {

void check_cache_invariants(const GeometryCache& g, const MatrixXd& X) {
  const Eigen::Index p = g.p;
  CHECK((g.U.transpose() * g.U - MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(g.has_W());
  const Eigen::Index q = g.n - p;
  CHECK((g.W.transpose() * g.W - MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((g.U.transpose() * g.W).cwiseAbs().maxCoeff() < 1e-10);
  const MatrixXd Q = g.W * g.W.transpose();
  CHECK((Q * Q - Q).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((Q * X).cwiseAbs().maxCoeff() < 1e-8);
}

}  // namespace

TEST_CASE("build_geometry: constant column") {
  MatrixXd X = MatrixXd::Ones(4, 1);
  const GeometryCache g = build_geometry(X);
  for (int i = 0; i < 4; ++i) CHECK(g.U(i, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((g.W.colwise().sum()).cwiseAbs().maxCoeff() < 1e-10);
  check_cache_invariants(g, X);
}

TEST_CASE("build_geometry: rank deficient and too few rows") {
  MatrixXd X(5, 2);
  X.col(0) = VectorXd::LinSpaced(5, 1.0, 5.0);
  X.col(1) = X.col(0);
  CHECK_THROWS_AS(build_geometry(X), RankDeficient);

  MatrixXd small = MatrixXd::Ones(3, 2);
  small(1, 1) = 2.0;
  CHECK_THROWS_AS(build_geometry(small), TooFewRows);
}

TEST_CASE("build_geometry: seeded 6x2 invariants and determinism") {
  RngStream rng(42);
  const MatrixXd X = random_matrix(6, 2, rng);
  const GeometryCache g = build_geometry(X);
  check_cache_invariants(g, X);
  const GeometryCache g2 = build_geometry(X);
  CHECK((g.U - g2.U).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.W - g2.W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_sphere: unit norm in the complement") {
  RngStream rng(7);
  const MatrixXd X = random_matrix(8, 2, rng);
  const GeometryCache g = build_geometry(X);
  for (int rep = 0; rep < 50; ++rep) {
    const SphereSample z = sample_sphere(g, rng);
    CHECK(std::abs(z.z_star.norm() - 1.0) < 1e-12);
    CHECK((X.transpose() * z.z_star).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((g.U.transpose() * z.z_star).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sample_sphere: coordinatewise symmetry, n=3 location") {
  RngStream rng(11);
  const GeometryCache g = build_geometry(MatrixXd::Ones(3, 1));
  const int N = 10000;
  VectorXd mean = VectorXd::Zero(3);
  for (int i = 0; i < N; ++i) mean += sample_sphere(g, rng).z_star;
  mean /= static_cast<double>(N);
  // E[z z^T] = Q / (n - p); each coordinate has variance Q_ii / 2 = 1/3.
  const double se = std::sqrt(1.0 / 3.0 / N);
  CHECK(mean.cwiseAbs().maxCoeff() < 3.0 * se);
}

TEST_CASE("sample_sphere: first W-coordinate matches the 3-sphere marginal") {
  RngStream rng(13);
  const GeometryCache g = build_geometry(MatrixXd::Ones(5, 1));
  const int N = 10000;
  std::vector<double> coord(N);
  for (int i = 0; i < N; ++i)
    coord[static_cast<size_t>(i)] = g.W.col(0).dot(sample_sphere(g, rng).z_star);
  // First coordinate of a uniform point on S^3 in R^4: density (2/pi) sqrt(1-t^2).
  auto cdf = [](double t) {
    t = std::clamp(t, -1.0, 1.0);
    return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / M_PI;
  };
  const double d = test::ks_statistic(coord, cdf);
  CHECK(test::kolmogorov_pvalue(d, N) > 0.01);
}

TEST_CASE("vol_P: sufficient-statistic geometry gives volume one") {
  RngStream rng(3);
  const MatrixXd X = random_matrix(7, 2, rng);
  const GeometryCache g = build_geometry(X);
  const VectorXd q = sample_sphere(g, rng).z_star;
  MatrixXd B(7, 3);
  B.leftCols(2) = g.U;
  B.col(2) = q;
  const TangentVolume tv = vol_P(g, B);
  CHECK(tv.singular_values.empty());
  CHECK(tv.log_vol == 0.0);
}

TEST_CASE("vol_P: block-orthogonal columns split into exact ones and the rest") {
  RngStream rng(5);
  const MatrixXd X = random_matrix(9, 2, rng);
  const GeometryCache g = build_geometry(X);
  // One column inside C(X), two inside the complement: U^T B = [e, 0, 0].
  MatrixXd B(9, 3);
  B.col(0) = g.U * Eigen::Vector2d(std::sqrt(0.5), std::sqrt(0.5));
  B.col(1) = g.W.col(0);
  B.col(2) = g.W.col(3);
  const TangentVolume tv = vol_P(g, B);
  CHECK(tv.singular_values.empty());
  CHECK(tv.log_vol == 0.0);
}

TEST_CASE("vol_P: full-A construction oracle on a Huber statistic") {
  RngStream rng(17);
  const Eigen::Index n = 6;
  MatrixXd X = MatrixXd::Ones(n, 1);
  const GeometryCache g = build_geometry(X);
  const EstimatorSpec spec = make_spec(PsiKind::Huber);
  VectorXd y = random_vector(n, rng);
  y(0) += 4.0;  // make the geometry non-trivial
  const Dataset data{y, X, Provenance::Observed};
  const SummaryStatistic stat = irls_solve(data, spec);
  const StatisticGradients grads = statistic_gradients(data, spec, stat);
  const MatrixXd B = normal_space_basis(grads, g);

  const TangentVolume tv = vol_P(g, B);

  // Lemma route: build A as the orthonormal complement of span(B), project.
  const MatrixXd A = orthonormal_complement(B);
  const MatrixXd P = g.W * (g.W.transpose() * A);
  const double direct = 0.5 * std::log((P.transpose() * P).determinant());
  CHECK(std::abs(tv.log_vol - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("vol_P: principal-angle identity on random subspaces") {
  RngStream rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform() * 8);  // 5..12
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);  // 1..3
    if (n <= p + 2) continue;
    const MatrixXd X = random_matrix(n, p, rng);
    const GeometryCache g = build_geometry(X);
    const MatrixXd B = orthonormalize(random_matrix(n, p + 1, rng));
    const MatrixXd A = orthonormal_complement(B);
    const MatrixXd P = g.W * (g.W.transpose() * A);
    const double direct = std::sqrt((P.transpose() * P).determinant());
    const double via_B = std::exp(vol_P(g, B).log_vol);
    CHECK(std::abs(via_B - direct) <= 1e-8 * std::abs(direct));
  }
}

TEST_CASE("orthonormalize: fixed point and hand case") {
  MatrixXd I3 = MatrixXd::Identity(3, 3);
  CHECK((orthonormalize(I3) - I3).cwiseAbs().maxCoeff() == 0.0);

  MatrixXd V(3, 2);
  V << 1, 1, 0, 1, 0, 0;
  const MatrixXd Q = orthonormalize(V);
  CHECK(Q(0, 0) == doctest::Approx(1.0));
  CHECK(Q(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(Q(0, 1)) < 1e-14);
  CHECK(std::abs(Q(2, 1)) < 1e-14);
}

TEST_CASE("orthonormalize: 20 random vectors in dimension 25") {
  RngStream rng(29);
  const MatrixXd V = random_matrix(25, 20, rng);
  const MatrixXd Q = orthonormalize(V);
  CHECK((Q.transpose() * Q - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
  // span preserved: projecting V onto Q loses nothing
  CHECK((Q * (Q.transpose() * V) - V).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("orthonormalize: dependent input throws") {
  MatrixXd V(4, 3);
  RngStream rng(31);
  V.col(0) = random_vector(4, rng);
  V.col(1) = random_vector(4, rng);
  V.col(2) = 0.25 * V.col(0) - 2.0 * V.col(1);
  CHECK_THROWS_AS(orthonormalize(V), LinearlyDependent);
}

TEST_CASE("vol_P: cost scales linearly in n (coarse timing)") {
  RngStream rng(37);
  const Eigen::Index p = 3;
  auto time_volp = [&](Eigen::Index n) {
    const MatrixXd X = random_matrix(n, p, rng);
    const GeometryCache g = build_geometry(X);
    const MatrixXd B = orthonormalize(random_matrix(n, p + 1, rng));
    const int reps = 200;
    double best = 1e300;
    for (int outer = 0; outer < 5; ++outer) {
      const auto t0 = std::chrono::steady_clock::now();
      double acc = 0.0;
      for (int i = 0; i < reps; ++i) acc += vol_P(g, B).log_vol;
      const auto t1 = std::chrono::steady_clock::now();
      (void)acc;
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t1 = time_volp(1024);
  const double t2 = time_volp(2048);
  CHECK(t2 / t1 < 2.5);
}
