#pragma once

#include <Eigen/Core>
#include <vector>

#include "brl/rng.hpp"
#include "brl/types.hpp"

namespace brl {

/// Orthonormal bases for the design column space and its orthogonal
/// complement. Immutable after construction; shareable across chains.
struct GeometryCache {
  MatrixXd U;  // n x p, orthonormal basis of C(X)
  MatrixXd W;  // n x (n-p), stored only when n <= kExplicitComplementLimit
  Eigen::Index n = 0;
  Eigen::Index p = 0;

  static constexpr Eigen::Index kExplicitComplementLimit = 4096;

  bool has_W() const { return W.size() > 0; }

  /// Q v = v - U (U^T v); avoids materializing W for large n.
  VectorXd project_complement(const VectorXd& v) const {
    return v - U * (U.transpose() * v);
  }
};

struct SphereSample {
  VectorXd z_star;  // unit norm, in the complement of C(X)
};

struct TangentVolume {
  double log_vol = 0.0;
  std::vector<double> singular_values;  // the non-unit ones that were retained
};

/// Orthonormalize the design columns. Throws RankDeficient when the smallest
/// factor diagonal falls below 1e-10 times the largest, TooFewRows when
/// n <= p + 1. Deterministic: columns carry a fixed sign convention.
GeometryCache build_geometry(const MatrixXd& X);

/// Uniform draw on the unit sphere in the complement of C(X): project a
/// standard normal vector and normalize. Retries up to 100 times on a
/// degenerate projection before throwing DegenerateDraw.
SphereSample sample_sphere(const GeometryCache& geom, RngStream& rng);

/// log Vol(P) from the non-unit singular values of U^T B ("non-unit" means
/// below 1 - 1e-9). B must have orthonormal columns spanning the normal space
/// of the constraint manifold at y. Throws DegenerateTangent when a retained
/// singular value collapses.
TangentVolume vol_P(const GeometryCache& geom, const MatrixXd& B);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns keep the
/// input order; each is sign-normalized (first entry of magnitude > 1e-12
/// positive). Throws LinearlyDependent if a post-projection norm falls below
/// 1e-10 times the input norm.
MatrixXd orthonormalize(const std::vector<VectorXd>& vectors);
MatrixXd orthonormalize(const MatrixXd& vectors);

/// Orthonormal basis of the orthogonal complement of span(B) in R^n.
MatrixXd orthonormal_complement(const MatrixXd& B);

}  // namespace brl
