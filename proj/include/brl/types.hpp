#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "brl/errors.hpp"

namespace brl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Provenance { Observed, Augmented };

/// Response vector plus full-rank design matrix; the unit of all fitting.
struct Dataset {
  VectorXd y;
  MatrixXd X;
  Provenance provenance = Provenance::Observed;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const {
    if (y.size() != X.rows()) throw ConfigError("Dataset: y and X row mismatch");
    if (y.size() <= X.cols() + 1) throw TooFewRows("need n > p + 1");
    if (!y.allFinite() || !X.allFinite()) throw NonFiniteValue("Dataset contains non-finite values");
  }
};

/// The conditioning statistic T(y) = (b, s).
struct SummaryStatistic {
  VectorXd b;   // coefficient estimate
  double s;     // scale estimate, > 0
};

struct ThetaState {
  VectorXd beta;
  double sigma2 = 1.0;
};

/// How the coefficient prior couples to the error variance.
///  - ScaledBySigma2: beta | sigma2 ~ N(mu0, sigma2 * Sigma0). Fully conjugate;
///    admits an exact joint posterior draw and closed-form moments.
///  - Independent: beta ~ N(mu0, Sigma0) regardless of sigma2. Matches the
///    priors of the reference analyses; theta updates are a two-block sweep.
enum class PriorCoupling { ScaledBySigma2, Independent };

struct NIGPrior {
  VectorXd mu0;
  MatrixXd Sigma0;
  double a0 = 1.0;
  double b0 = 1.0;
  PriorCoupling coupling = PriorCoupling::Independent;

  void validate() const {
    if (Sigma0.rows() != Sigma0.cols() || Sigma0.rows() != mu0.size())
      throw ConfigError("NIGPrior: dimension mismatch");
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw ConfigError("NIGPrior: a0, b0 must be positive");
  }
};

enum class ProposalKind { UniformSphere, SphereRandomWalk };

struct ChainConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 5;
  std::uint64_t seed = 1;
  ProposalKind proposal = ProposalKind::UniformSphere;
  double vmf_concentration = 50.0;  // used by SphereRandomWalk only
  // Recompute the statistic on the augmented data and re-map through h if it
  // drifted beyond 10x the solver tolerance.
  int repair_interval = 100;
  // Record per-iteration deviation of T(augmented) from the target.
  bool track_constraint = false;

  void validate() const {
    if (iterations <= 0 || burn_in < 0 || thin < 1) throw ConfigError("ChainConfig: bad sizes");
    if (burn_in >= iterations) throw ConfigError("ChainConfig: burn_in must be < iterations");
    if (proposal == ProposalKind::SphereRandomWalk && !(vmf_concentration > 0.0))
      throw ConfigError("ChainConfig: concentration must be > 0");
  }
};

struct ChainOutput {
  MatrixXd beta;                       // draws x p, post burn-in, thinned
  VectorXd sigma2;                     // draws
  Dataset augmented_final;
  double acceptance_rate = 0.0;        // accepted / attempted, exactly
  std::int64_t accepted = 0;
  std::int64_t attempted = 0;
  std::vector<double> loglik_trace;    // log f(y_aug | theta) per iteration
  std::vector<double> constraint_trace;  // filled when track_constraint
};

/// Output of the hierarchical location-scale sweep: per-group draws plus the
/// shared mean and between-group variance.
struct HierarchicalOutput {
  MatrixXd theta;    // draws x groups
  MatrixXd sigma2;   // draws x groups
  VectorXd mu;       // draws
  VectorXd tau2;     // draws
  std::vector<double> acceptance_rate;  // per group
};

}  // namespace brl
