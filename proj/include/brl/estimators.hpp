#pragma once

#include <optional>
#include <utility>

#include "brl/geometry.hpp"
#include "brl/types.hpp"

namespace brl {

enum class PsiKind { Huber, Tukey, LeastSquares };
enum class ChiKind { HuberProposal2, SdMoment };

/// Bounded location/regression score function. psi is odd and differentiable
/// except on a finite set; kinks take the one-sided derivative from the
/// interior region.
struct PsiFamily {
  PsiKind kind = PsiKind::Huber;
  double tuning = 1.345;  // ignored for LeastSquares

  double psi(double u) const;
  double dpsi(double u) const;
  double weight(double u) const;  // psi(u)/u, continuously extended at 0
};

/// Scale score function, centered so that E chi(Z) = 0 under a standard
/// normal (HuberProposal2) or chi(u) = u^2 - 1 (n-denominator sd).
struct ChiFamily {
  ChiKind kind = ChiKind::HuberProposal2;
  double tuning = 1.345;    // truncation point k
  double centering = 0.0;   // beta_k; ignored for SdMoment

  double chi(double u) const;
  double dchi(double u) const;
};

struct EstimatorSpec {
  PsiFamily psi;
  ChiFamily chi;
  double tol = 1e-10;
  int max_iter = 200;

  void validate() const {
    if (!(tol > 0.0)) throw ConfigError("EstimatorSpec: tol must be > 0");
    if (max_iter < 1) throw ConfigError("EstimatorSpec: max_iter must be >= 1");
  }
};

/// Gradients of the statistic with respect to the data vector.
struct StatisticGradients {
  MatrixXd grad_b;  // n x p; column j is the gradient of b_j
  VectorXd grad_s;  // n
};

/// E[min(|Z|, k)^2] for standard normal Z; the proposal-2 consistency
/// constant.
double chi_centering(double k);

/// Tuning constant giving the requested asymptotic efficiency of the location
/// M-estimator at the standard normal. Bisection to 1e-6 on efficiency.
double solve_tuning(PsiKind kind, double efficiency);

/// Asymptotic efficiency (integral ratio) of the location estimator at the
/// standard normal for the given tuning constant.
double normal_efficiency(PsiKind kind, double tuning);

/// Spec with both families tuned for the given normal efficiency; the chi
/// truncation shares the Huber psi constant for that efficiency.
EstimatorSpec make_spec(PsiKind kind, double efficiency = 0.95);

/// Least-squares coefficients with the n-denominator residual sd; the
/// sufficient-statistic configuration.
EstimatorSpec least_squares_spec();

/// Simultaneous M-estimate of coefficients and scale via IRLS. Converges when
/// both estimating equations, scaled by n, are below tol in max-norm.
SummaryStatistic irls_solve(const Dataset& data, const EstimatorSpec& spec,
                            std::optional<SummaryStatistic> init = std::nullopt);

/// Max-norm residual of the estimating equations, scaled by n.
double estimating_equation_residual(const Dataset& data, const EstimatorSpec& spec,
                                    const SummaryStatistic& stat);

/// Implicit-function gradients of (b, s) with respect to y at a solution of
/// the estimating equations.
StatisticGradients statistic_gradients(const Dataset& data, const EstimatorSpec& spec,
                                       const SummaryStatistic& stat);

/// Orthonormal basis of the normal space of the constraint manifold at y:
/// Gram-Schmidt over [grad b_1, ..., grad b_p, grad s].
MatrixXd normal_space_basis(const StatisticGradients& grads, const GeometryCache& geom);

/// 1.4826 * median absolute deviation about the median; falls back to the
/// n-denominator sd when the MAD degenerates to zero.
double robust_scale_estimate(const VectorXd& v);

}  // namespace brl
