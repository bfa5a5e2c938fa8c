#pragma once

#include <utility>
#include <vector>

#include "brl/estimators.hpp"
#include "brl/geometry.hpp"
#include "brl/rng.hpp"
#include "brl/types.hpp"

namespace brl {

/// Base density on the unit sphere S in the complement of C(X). The uniform
/// base is the independence proposal; the von Mises-Fisher base is the
/// symmetric random-walk kernel (its density cancels in the MH ratio).
/// The sphere lives in the (n-p)-dimensional complement; `dim` is n - p.
struct SphereBase {
  ProposalKind kind = ProposalKind::UniformSphere;
  Eigen::Index dim = 0;
  VectorXd mu;          // vMF mean direction (ambient unit vector in the complement)
  double kappa = 0.0;   // vMF concentration

  /// log density at z (ambient coordinates) with respect to the surface
  /// measure of S^{dim-1}.
  double log_density(const VectorXd& z) const;

  static SphereBase uniform(Eigen::Index dim = 0) {
    return SphereBase{ProposalKind::UniformSphere, dim, VectorXd(), 0.0};
  }
  static SphereBase von_mises_fisher(VectorXd mu, double kappa, Eigen::Index dim) {
    return SphereBase{ProposalKind::SphereRandomWalk, dim, std::move(mu), kappa};
  }
};

/// Draw from the von Mises-Fisher distribution on the sphere in the
/// complement of C(X) (Wood's rejection scheme for the cosine).
VectorXd sample_vmf(const GeometryCache& geom, const VectorXd& mu, double kappa, RngStream& rng);

/// The assembled change-of-variables density of y = h(z*) on the constraint
/// manifold: log p(y) = log p(z*) - (n-p-1) log r + log|cos gamma| + log Vol(P).
struct ProposalEvaluation {
  double r = 1.0;             // s(X, y_obs) / s(X, z*)
  double log_cos_gamma = 0.0; // log |cos gamma|, <= 0
  double log_vol_P = 0.0;
  double log_base = 0.0;      // log p(z*)
  double log_density = 0.0;

  /// The state-dependent Jacobian part (base density excluded); this is what
  /// enters the MH ratio when the sphere kernel is symmetric.
  double log_jacobian() const { return log_density - log_base; }
};

/// Scale-then-shift map carrying any vector with positive scale onto the
/// constraint manifold A = { y : T(y) = target }.
Dataset h_transform(const VectorXd& z_star, const SummaryStatistic& target,
                    const EstimatorSpec& spec, const MatrixXd& X);

/// Inverse of h on A: z* = Qy / ||Qy||.
SphereSample inverse_h(const Dataset& y, const GeometryCache& geom);

/// Exact proposal density of y in A under the given sphere base density.
ProposalEvaluation proposal_log_density(const Dataset& y, const SummaryStatistic& target,
                                        const EstimatorSpec& spec, const GeometryCache& geom,
                                        const SphereBase& base);

/// One Metropolis-Hastings update of the augmented data. Returns the new
/// state and whether the proposal was accepted. A proposal whose scale
/// degenerates counts as a rejection.
std::pair<Dataset, bool> mh_augment_step(const Dataset& current, const ThetaState& theta,
                                         const SummaryStatistic& target,
                                         const EstimatorSpec& spec, const GeometryCache& geom,
                                         const ChainConfig& config, RngStream& rng);

/// Exact theta draw for the normal linear model. With the conjugate coupling
/// this is an independent draw from the joint posterior; with the independent
/// coupling it is a two-block sweep that needs the current state (pass
/// nullptr to start from the prior mean). Accepts n = 0.
ThetaState gibbs_theta_normal(const VectorXd& y, const MatrixXd& X, const NIGPrior& prior,
                              RngStream& rng, const ThetaState* current = nullptr);

/// Closed-form posterior under the conjugate coupling; the oracle the chain
/// is validated against when the conditioning statistic is sufficient.
struct ConjugatePosterior {
  VectorXd beta_mean;
  MatrixXd beta_cov;
  double sigma2_mean = 0.0;
  double sigma2_var = 0.0;
  double an = 0.0, bn = 0.0;
  VectorXd mu_n;
  MatrixXd Lambda_n;
};
ConjugatePosterior conjugate_posterior(const VectorXd& y, const MatrixXd& X,
                                       const NIGPrior& prior);

double normal_loglik(const VectorXd& y, const MatrixXd& X, const ThetaState& theta);

enum class ModelKind { NormalLinear, LocationScale };

/// Full restricted-likelihood chain: alternates the augmented-data MH step
/// with the exact theta update, conditioning on T(y_obs).
ChainOutput run_chain(ModelKind model, const VectorXd& y_obs, const MatrixXd& X,
                      const NIGPrior& prior, const EstimatorSpec& spec,
                      const ChainConfig& config);

/// Full-data normal chain (no augmentation); baseline and normal-theory fits.
ChainOutput run_normal_chain(const VectorXd& y_obs, const MatrixXd& X, const NIGPrior& prior,
                             const ChainConfig& config);

struct HierarchicalPrior {
  double a_s = 5.0;
  double b_s = 20.0;
};

enum class FitMode { Restricted, FullData };

/// Hierarchical location-scale sweep over groups: per-group augmentation (in
/// Restricted mode), per-group conjugate updates, and closed-form (mu, tau2)
/// updates under the improper tau^-2 prior. Requires >= 3 groups.
HierarchicalOutput run_hierarchical(const std::vector<Dataset>& groups, HierarchicalPrior hyper,
                                    const EstimatorSpec& spec, const ChainConfig& config,
                                    FitMode mode = FitMode::Restricted);

/// Student-t baseline via the normal scale-mixture representation.
ChainOutput run_student_t_baseline(const VectorXd& y_obs, const MatrixXd& X,
                                   const NIGPrior& prior, double nu, const ChainConfig& config);

/// Rescale the variance prior by (nu-2)/nu so the t model carries the same
/// prior error variance as the normal model.
NIGPrior student_t_adjusted_prior(NIGPrior prior, double nu);

}  // namespace brl
