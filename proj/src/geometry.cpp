#include "brl/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "brl/errors.hpp"

namespace brl {

namespace {

void fix_column_signs(MatrixXd& M) {
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (std::abs(M(i, j)) > 1e-12) {
        if (M(i, j) < 0.0) M.col(j) = -M.col(j);
        break;
      }
    }
  }
}

}  // namespace

GeometryCache build_geometry(const MatrixXd& X) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n <= p + 1) throw TooFewRows("build_geometry: need n > p + 1");

  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  const VectorXd diag = qr.matrixR().diagonal().head(p).cwiseAbs();
  const double largest = diag.maxCoeff();
  if (!(largest > 0.0) || diag.minCoeff() < 1e-10 * largest)
    throw RankDeficient("build_geometry: numerical rank of X below p");

  GeometryCache geom;
  geom.n = n;
  geom.p = p;
  geom.U = qr.householderQ() * MatrixXd::Identity(n, p);
  fix_column_signs(geom.U);
  if (n <= GeometryCache::kExplicitComplementLimit) {
    MatrixXd tail(n, n - p);
    tail.setZero();
    tail.bottomRows(n - p).setIdentity();
    geom.W = qr.householderQ() * tail;
    fix_column_signs(geom.W);
  }
  return geom;
}

SphereSample sample_sphere(const GeometryCache& geom, RngStream& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    VectorXd v(geom.n);
    for (Eigen::Index i = 0; i < geom.n; ++i) v(i) = rng.normal();
    VectorXd z = geom.project_complement(v);
    const double norm = z.norm();
    if (norm > 1e-12) return SphereSample{z / norm};
  }
  throw DegenerateDraw("sample_sphere: projected norm below 1e-12 in 100 attempts");
}

TangentVolume vol_P(const GeometryCache& geom, const MatrixXd& B) {
  if (B.rows() != geom.n || B.cols() != geom.p + 1)
    throw ConfigError("vol_P: B must be n x (p+1)");

  const MatrixXd M = geom.U.transpose() * B;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  TangentVolume tv;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s < 1.0 - 1e-9) {
      if (s <= 1e-12)
        throw DegenerateTangent("vol_P: tangent volume collapsed (singular value <= 1e-12)");
      tv.singular_values.push_back(s);
      tv.log_vol += std::log(s);
    }
  }
  return tv;
}

MatrixXd orthonormalize(const MatrixXd& vectors) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index k = vectors.cols();
  MatrixXd Q(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    VectorXd v = vectors.col(j);
    const double input_norm = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) v -= (Q.col(i).dot(v)) * Q.col(i);
    const double norm = v.norm();
    if (norm < 1e-10 * input_norm || !(norm > 0.0))
      throw LinearlyDependent("orthonormalize: vector " + std::to_string(j) +
                              " is in the span of its predecessors");
    Q.col(j) = v / norm;
  }
  fix_column_signs(Q);
  return Q;
}

MatrixXd orthonormalize(const std::vector<VectorXd>& vectors) {
  if (vectors.empty()) throw ConfigError("orthonormalize: no vectors");
  MatrixXd M(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (Eigen::Index j = 0; j < M.cols(); ++j) M.col(j) = vectors[static_cast<size_t>(j)];
  return orthonormalize(M);
}

MatrixXd orthonormal_complement(const MatrixXd& B) {
  const Eigen::Index n = B.rows();
  const Eigen::Index k = B.cols();
  Eigen::HouseholderQR<MatrixXd> qr(B);
  MatrixXd tail(n, n - k);
  tail.setZero();
  tail.bottomRows(n - k).setIdentity();
  return qr.householderQ() * tail;
}

}  // namespace brl
