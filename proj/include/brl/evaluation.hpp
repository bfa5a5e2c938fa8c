#pragma once

#include <map>
#include <string>
#include <vector>

#include "brl/sampler.hpp"
#include "brl/types.hpp"

namespace brl {

/// Draw-based mixture representation of the posterior predictive density at a
/// single covariate point. nu == 0 means normal components; nu > 0 means
/// Student-t components with that many degrees of freedom.
struct PredictiveDensity {
  VectorXd means;
  VectorXd sigma2;
  double nu = 0.0;

  double log_density(double y) const;
  double density(double y) const { return std::exp(log_density(y)); }
  /// Central interval by numeric CDF inversion on a grid.
  std::pair<double, double> central_interval(double mass) const;
};

/// Monte Carlo mixture over the chain draws. Throws TooFewDraws below 100.
PredictiveDensity predictive_density(const ChainOutput& draws, const VectorXd& x_new);

/// Same, with Student-t components (for the heavy-tailed baseline).
PredictiveDensity predictive_density_t(const ChainOutput& draws, const VectorXd& x_new,
                                       double nu);

/// Classical plug-in predictive: a single normal component.
PredictiveDensity plug_in_predictive(double mean, double sigma2);

/// KL divergence from the known good-data law N(theta, sigma2) to the fitted
/// predictive; adaptive Simpson over theta +- 10 sigma, absolute tol 1e-5.
double kl_good_data(const PredictiveDensity& pred, double theta, double sigma2);

/// Contaminated-mixture simulation design: full factorial over (p, m, n)
/// replicated, with group means drawn from N(mu, tau2).
struct SimulationDesign {
  double mu = 0.0;
  double tau2 = 1.0;
  double sigma2 = 4.0;
  std::vector<double> p_levels{0.1, 0.2, 0.3};
  std::vector<double> m_levels{9.0, 25.0};
  std::vector<int> n_levels{25, 50, 100};
  int replicates = 5;
  int K = 30;

  void validate() const;
  int groups_per_dataset() const {
    return static_cast<int>(p_levels.size() * m_levels.size() * n_levels.size()) * replicates;
  }
};

struct SimulatedGroup {
  VectorXd y;
  double theta = 0.0;  // true group mean
  double p = 0.0;
  double m = 1.0;
  int n = 0;
};

/// One dataset = one draw of all groups. Deterministic given the stream.
std::vector<SimulatedGroup> simulate_dataset(const SimulationDesign& design, RngStream& rng);

/// K datasets from seeded substreams.
std::vector<std::vector<SimulatedGroup>> simulate_contaminated(const SimulationDesign& design,
                                                               RngStream& rng);

/// Trimmed log marginal pseudo-likelihood for one train/holdout split: order
/// holdout cases by the base method's log density (ties by case index), drop
/// the lowest floor(alpha*M), average each method over the survivors.
struct TLMScores {
  std::map<std::string, double> score;
  int trimmed = 0;
  int kept = 0;
};
TLMScores tlm_score(const std::map<std::string, std::vector<double>>& holdout_logdens,
                    const std::string& base, double alpha);

/// Aggregate over repeated splits.
struct TLMReport {
  double alpha = 0.0;
  std::string base;
  std::vector<TLMScores> splits;
  std::map<std::string, double> mean;
  std::map<std::string, double> sd;
};
TLMReport aggregate_tlm(std::vector<TLMScores> splits, const std::string& base, double alpha);

/// Stratified train/holdout split; per-stratum train sizes are
/// round(fraction * size), clamped to keep both sides non-empty.
std::pair<std::vector<int>, std::vector<int>> crossval_split(
    int n_cases, double fraction, const std::vector<int>* strata, RngStream& rng);

enum class StudyFitter {
  RestrictedHuber,
  RestrictedTukey,
  NormalTheory,
  ClassicalHuber,
  ClassicalTukey,
};
std::string fitter_name(StudyFitter f);

struct StudyPrior {
  double a_s = 5.0;
  double c = 1.0;
  double b_s() const { return 4.0 * a_s * c; }
};

struct KLCell {
  std::string method;
  int prior_index = 0;
  int dataset = 0;
  int group = 0;
  double kl = 0.0;
  bool failed = false;
};

struct KLAggregate {
  std::string method;
  int prior_index = 0;
  double mean = 0.0;
  double se = 0.0;  // between-replicate SE, K-1 denominator
};

struct KLMainEffect {
  std::string method;
  int prior_index = 0;
  std::string factor;  // "n", "p", or "m"
  double level = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

struct KLReport {
  std::vector<KLCell> cells;
  std::vector<KLAggregate> aggregates;
  std::vector<KLMainEffect> main_effects;
};

struct StudyConfig {
  SimulationDesign design;
  std::vector<StudyPrior> priors{{5.0, 0.5}, {5.0, 1.0}};
  std::vector<StudyFitter> fitters{StudyFitter::RestrictedHuber, StudyFitter::RestrictedTukey,
                                   StudyFitter::NormalTheory, StudyFitter::ClassicalHuber,
                                   StudyFitter::ClassicalTukey};
  ChainConfig chain;  // per-cell chain settings
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Generate datasets, fit every (fitter x prior) cell, score per-group KL
/// against the good-data law, aggregate. A failed cell is recorded, not fatal.
KLReport run_simulation_study(const StudyConfig& config);

}  // namespace brl
