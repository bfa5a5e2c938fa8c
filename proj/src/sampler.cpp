#include "brl/sampler.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "brl/quadrature.hpp"

namespace brl {

namespace {

constexpr int kMaxConsecutiveFailures = 500;

double log_sphere_area(Eigen::Index d) {
  // Surface area of the unit sphere S^{d-1} in R^d.
  return std::log(2.0) + 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d);
}

double log_bessel_i(double nu, double x) {
  if (x < 500.0) return std::log(std::cyl_bessel_i(nu, x));
  // Uniform asymptotic head for large argument.
  const double mu4 = 4.0 * nu * nu;
  return x - 0.5 * std::log(2.0 * M_PI * x) +
         std::log1p(-(mu4 - 1.0) / (8.0 * x) + (mu4 - 1.0) * (mu4 - 9.0) / (128.0 * x * x));
}

EstimatorSpec tightened(const EstimatorSpec& spec) {
  EstimatorSpec tight = spec;
  tight.tol = std::max(1e-13, spec.tol * 1e-2);
  tight.max_iter = std::max(spec.max_iter, 500);
  return tight;
}

}  // namespace

double SphereBase::log_density(const VectorXd& z) const {
  if (dim < 2) throw ConfigError("SphereBase: dimension not set");
  if (kind == ProposalKind::UniformSphere) return -log_sphere_area(dim);
  const double dd = static_cast<double>(dim);
  const double order = 0.5 * dd - 1.0;
  return kappa * mu.dot(z) + order * std::log(kappa) - 0.5 * dd * std::log(2.0 * M_PI) -
         log_bessel_i(order, kappa);
}

VectorXd sample_vmf(const GeometryCache& geom, const VectorXd& mu, double kappa,
                    RngStream& rng) {
  const double d = static_cast<double>(geom.n - geom.p);  // ambient dim of the sphere
  const double dm1 = d - 1.0;
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);

  double w = 1.0;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  // Uniform tangent direction at mu inside the complement of C(X).
  VectorXd t;
  for (int attempt = 0; attempt < 100; ++attempt) {
    VectorXd g(geom.n);
    for (Eigen::Index i = 0; i < geom.n; ++i) g(i) = rng.normal();
    t = geom.project_complement(g);
    t -= mu.dot(t) * mu;
    const double norm = t.norm();
    if (norm > 1e-12) {
      t /= norm;
      break;
    }
    if (attempt == 99) throw DegenerateDraw("sample_vmf: no tangent direction");
  }
  VectorXd z = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * t;
  return z / z.norm();
}

Dataset h_transform(const VectorXd& z_star, const SummaryStatistic& target,
                    const EstimatorSpec& spec, const MatrixXd& X) {
  const EstimatorSpec tight = tightened(spec);
  const Dataset zdata{z_star, X, Provenance::Augmented};
  const SummaryStatistic tz = irls_solve(zdata, tight);
  if (!(tz.s > 1e-12)) throw ZeroScale("h_transform: scale of z* below 1e-12");

  const double c = target.s / tz.s;
  // Scale equivariance gives b(X, c z*) = c b(X, z*); one solve suffices.
  Dataset out{c * z_star + X * (target.b - c * tz.b), X, Provenance::Augmented};

  const SummaryStatistic check = irls_solve(out, tight, target);
  const double dev = std::max((check.b - target.b).cwiseAbs().maxCoeff(),
                              std::abs(check.s - target.s));
  if (dev > 10.0 * spec.tol)
    throw PostConditionViolated("h_transform: recomputed statistic deviates by " +
                                std::to_string(dev));
  return out;
}

SphereSample inverse_h(const Dataset& y, const GeometryCache& geom) {
  VectorXd z = geom.project_complement(y.y);
  const double norm = z.norm();
  if (!(norm > 1e-12)) throw DegenerateProjection("inverse_h: ||Qy|| below 1e-12");
  return SphereSample{z / norm};
}

namespace {

/// Shared assembly of the proposal evaluation once z* and s(X, z*) are known.
ProposalEvaluation evaluate_parts(const Dataset& y, const VectorXd& z_star, double s_zstar,
                                  const SummaryStatistic& target, const EstimatorSpec& spec,
                                  const GeometryCache& geom, const SphereBase& base) {
  ProposalEvaluation ev;
  ev.r = target.s / s_zstar;

  // Statistic and gradients at y; warm start from the target it must equal.
  const SummaryStatistic stat = irls_solve(y, tightened(spec), target);
  const StatisticGradients grads = statistic_gradients(y, spec, stat);

  const VectorXd z = ev.r * z_star;
  const double cosg = grads.grad_s.dot(z) / (grads.grad_s.norm() * z.norm());
  if (std::abs(cosg) < 1e-12)
    throw NearTangentDegeneracy("proposal density: |cos gamma| below 1e-12");
  ev.log_cos_gamma = std::log(std::abs(cosg));

  const MatrixXd B = normal_space_basis(grads, geom);
  ev.log_vol_P = vol_P(geom, B).log_vol;

  SphereBase b = base;
  if (b.dim == 0) b.dim = geom.n - geom.p;
  ev.log_base = b.log_density(z_star);

  const double npm1 = static_cast<double>(geom.n - geom.p - 1);
  ev.log_density = ev.log_base - npm1 * std::log(ev.r) + ev.log_cos_gamma + ev.log_vol_P;
  return ev;
}

}  // namespace

ProposalEvaluation proposal_log_density(const Dataset& y, const SummaryStatistic& target,
                                        const EstimatorSpec& spec, const GeometryCache& geom,
                                        const SphereBase& base) {
  const SphereSample z = inverse_h(y, geom);
  const SummaryStatistic tz = irls_solve(Dataset{z.z_star, y.X, Provenance::Augmented},
                                         tightened(spec));
  return evaluate_parts(y, z.z_star, tz.s, target, spec, geom, base);
}

namespace {

struct AugmentedState {
  Dataset data;
  ProposalEvaluation eval;  // uniform-base evaluation; theta-independent
};

/// One MH proposal/accept decision given the cached evaluation of the current
/// state. Returns true when accepted, false on rejection (including proposals
/// whose scale degenerates).
bool mh_step_cached(AugmentedState& state, const ThetaState& theta,
                    const SummaryStatistic& target, const EstimatorSpec& spec,
                    const GeometryCache& geom, const ChainConfig& config, RngStream& rng,
                    int* consecutive_failures) {
  VectorXd z_prop;
  if (config.proposal == ProposalKind::UniformSphere) {
    z_prop = sample_sphere(geom, rng).z_star;
  } else {
    const VectorXd center = inverse_h(state.data, geom).z_star;
    z_prop = sample_vmf(geom, center, config.vmf_concentration, rng);
  }

  Dataset proposed;
  ProposalEvaluation eval_p;
  try {
    const SummaryStatistic tz =
        irls_solve(Dataset{z_prop, state.data.X, Provenance::Augmented}, tightened(spec));
    if (!(tz.s > 1e-12)) throw ZeroScale("proposal scale");
    const double c = target.s / tz.s;
    proposed = Dataset{c * z_prop + state.data.X * (target.b - c * tz.b), state.data.X,
                       Provenance::Augmented};
    eval_p = evaluate_parts(proposed, z_prop, tz.s, target, spec, geom, SphereBase::uniform());
    *consecutive_failures = 0;
  } catch (const NumericalError&) {
    if (++*consecutive_failures >= kMaxConsecutiveFailures)
      throw ChainStalled("mh step: 500 consecutive proposals failed preconditions");
    return false;
  }

  // Base densities cancel: the uniform base is state-free and the vMF kernel
  // is symmetric on the sphere.
  const double log_r = normal_loglik(proposed.y, proposed.X, theta) -
                       normal_loglik(state.data.y, state.data.X, theta) +
                       state.eval.log_jacobian() - eval_p.log_jacobian();
  if (std::log(rng.uniform()) < log_r) {
    state.data = std::move(proposed);
    state.eval = eval_p;
    return true;
  }
  return false;
}

}  // namespace

std::pair<Dataset, bool> mh_augment_step(const Dataset& current, const ThetaState& theta,
                                         const SummaryStatistic& target,
                                         const EstimatorSpec& spec, const GeometryCache& geom,
                                         const ChainConfig& config, RngStream& rng) {
  AugmentedState state{current,
                       proposal_log_density(current, target, spec, geom, SphereBase::uniform())};
  int failures = 0;
  const bool accepted = mh_step_cached(state, theta, target, spec, geom, config, rng, &failures);
  return {state.data, accepted};
}

double normal_loglik(const VectorXd& y, const MatrixXd& X, const ThetaState& theta) {
  const double n = static_cast<double>(y.size());
  static const double kLog2Pi = 1.8378770664093454836;
  const double rss = (y - X * theta.beta).squaredNorm();
  return -0.5 * n * (kLog2Pi + std::log(theta.sigma2)) - 0.5 * rss / theta.sigma2;
}

ConjugatePosterior conjugate_posterior(const VectorXd& y, const MatrixXd& X,
                                       const NIGPrior& prior) {
  prior.validate();
  const Eigen::Index p = prior.mu0.size();
  const double n = static_cast<double>(y.size());

  const MatrixXd L0 = prior.Sigma0.llt().solve(MatrixXd::Identity(p, p));
  ConjugatePosterior post;
  post.Lambda_n = L0 + X.transpose() * X;
  Eigen::LLT<MatrixXd> lltn(post.Lambda_n);
  if (lltn.info() != Eigen::Success)
    throw NumericalPD("conjugate_posterior: posterior precision not PD");
  post.mu_n = lltn.solve(L0 * prior.mu0 + X.transpose() * y);
  post.an = prior.a0 + 0.5 * n;
  post.bn = prior.b0 + 0.5 * (y.squaredNorm() + prior.mu0.dot(L0 * prior.mu0) -
                              post.mu_n.dot(post.Lambda_n * post.mu_n));
  if (!(post.bn > 0.0)) throw NumericalPD("conjugate_posterior: nonpositive rate");
  post.beta_mean = post.mu_n;
  const MatrixXd Sn = lltn.solve(MatrixXd::Identity(p, p));
  post.beta_cov = Sn * post.bn / (post.an - 1.0);
  post.sigma2_mean = post.bn / (post.an - 1.0);
  post.sigma2_var = post.bn * post.bn / ((post.an - 1.0) * (post.an - 1.0) * (post.an - 2.0));
  return post;
}

ThetaState gibbs_theta_normal(const VectorXd& y, const MatrixXd& X, const NIGPrior& prior,
                              RngStream& rng, const ThetaState* current) {
  prior.validate();
  const Eigen::Index p = prior.mu0.size();
  if (X.cols() != p || X.rows() != y.size())
    throw ConfigError("gibbs_theta_normal: dimension mismatch");
  const double n = static_cast<double>(y.size());

  ThetaState out;
  if (prior.coupling == PriorCoupling::ScaledBySigma2) {
    const ConjugatePosterior post = conjugate_posterior(y, X, prior);
    out.sigma2 = rng.inverse_gamma(post.an, post.bn);
    VectorXd z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
    // beta = mu_n + sqrt(sigma2) * Lambda_n^{-1/2} z
    Eigen::LLT<MatrixXd> lltn(post.Lambda_n);
    out.beta = post.mu_n +
               std::sqrt(out.sigma2) * lltn.matrixU().solve(z);
    return out;
  }

  // Independent coupling: two-block sweep (sigma2 | beta, then beta | sigma2).
  const VectorXd beta_cur = current ? current->beta : prior.mu0;
  const double rss = (y - X * beta_cur).squaredNorm();
  out.sigma2 = rng.inverse_gamma(prior.a0 + 0.5 * n, prior.b0 + 0.5 * rss);

  const MatrixXd L0 = prior.Sigma0.llt().solve(MatrixXd::Identity(p, p));
  const MatrixXd prec = L0 + X.transpose() * X / out.sigma2;
  Eigen::LLT<MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NumericalPD("gibbs_theta_normal: conditional precision not PD");
  const VectorXd mean = llt.solve(L0 * prior.mu0 + X.transpose() * y / out.sigma2);
  VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
  out.beta = mean + llt.matrixU().solve(z);
  return out;
}

ChainOutput run_chain(ModelKind model, const VectorXd& y_obs, const MatrixXd& X,
                      const NIGPrior& prior, const EstimatorSpec& spec,
                      const ChainConfig& config) {
  (void)model;  // LocationScale is NormalLinear with a ones design
  config.validate();
  const Dataset observed{y_obs, X, Provenance::Observed};
  observed.validate();

  const GeometryCache geom = build_geometry(X);
  const SummaryStatistic target = irls_solve(observed, tightened(spec));
  RngStream rng(config.seed);

  AugmentedState state{Dataset{y_obs, X, Provenance::Augmented},
                       proposal_log_density(observed, target, spec, geom,
                                            SphereBase::uniform())};
  ThetaState theta{target.b, target.s * target.s};

  ChainOutput out;
  const int kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
  out.beta.resize(kept, X.cols());
  out.sigma2.resize(kept);
  out.loglik_trace.reserve(config.iterations);
  if (config.track_constraint) out.constraint_trace.reserve(config.iterations);

  int consecutive_failures = 0;
  int stored = 0;
  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool accepted = mh_step_cached(state, theta, target, spec, geom, config, rng,
                                         &consecutive_failures);
    out.attempted += 1;
    out.accepted += accepted ? 1 : 0;

    theta = gibbs_theta_normal(state.data.y, X, prior, rng, &theta);
    out.loglik_trace.push_back(normal_loglik(state.data.y, X, theta));

    const bool repair_due = config.repair_interval > 0 &&
                            (iter + 1) % config.repair_interval == 0;
    if (repair_due || config.track_constraint) {
      const SummaryStatistic cur = irls_solve(state.data, tightened(spec), target);
      const double dev = std::max((cur.b - target.b).cwiseAbs().maxCoeff(),
                                  std::abs(cur.s - target.s));
      if (config.track_constraint) out.constraint_trace.push_back(dev);
      if (repair_due && dev > 10.0 * spec.tol) {
        const SphereSample z = inverse_h(state.data, geom);
        state.data = h_transform(z.z_star, target, spec, X);
        state.eval = proposal_log_density(state.data, target, spec, geom,
                                          SphereBase::uniform());
      }
    }

    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      out.beta.row(stored) = theta.beta.transpose();
      out.sigma2(stored) = theta.sigma2;
      ++stored;
    }
  }
  out.beta.conservativeResize(stored, Eigen::NoChange);
  out.sigma2.conservativeResize(stored);
  out.augmented_final = state.data;
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(out.attempted);
  return out;
}

ChainOutput run_normal_chain(const VectorXd& y_obs, const MatrixXd& X, const NIGPrior& prior,
                             const ChainConfig& config) {
  config.validate();
  RngStream rng(config.seed);
  ThetaState theta{prior.mu0, prior.b0 / prior.a0};

  ChainOutput out;
  const int kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
  out.beta.resize(kept, X.cols());
  out.sigma2.resize(kept);
  int stored = 0;
  for (int iter = 0; iter < config.iterations; ++iter) {
    theta = gibbs_theta_normal(y_obs, X, prior, rng, &theta);
    out.loglik_trace.push_back(normal_loglik(y_obs, X, theta));
    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      out.beta.row(stored) = theta.beta.transpose();
      out.sigma2(stored) = theta.sigma2;
      ++stored;
    }
  }
  out.beta.conservativeResize(stored, Eigen::NoChange);
  out.sigma2.conservativeResize(stored);
  out.augmented_final = Dataset{y_obs, X, Provenance::Observed};
  out.attempted = config.iterations;
  out.accepted = config.iterations;
  out.acceptance_rate = 1.0;
  return out;
}

NIGPrior student_t_adjusted_prior(NIGPrior prior, double nu) {
  if (!(nu > 2.0)) throw ConfigError("student_t_adjusted_prior: need nu > 2");
  prior.b0 *= (nu - 2.0) / nu;
  return prior;
}

ChainOutput run_student_t_baseline(const VectorXd& y_obs, const MatrixXd& X,
                                   const NIGPrior& prior, double nu,
                                   const ChainConfig& config) {
  if (!(nu > 2.0)) throw ConfigError("run_student_t_baseline: need nu > 2");
  config.validate();
  prior.validate();
  const Eigen::Index n = y_obs.size();
  const Eigen::Index p = X.cols();
  RngStream rng(config.seed);

  const MatrixXd L0 = prior.Sigma0.llt().solve(MatrixXd::Identity(p, p));
  VectorXd beta = X.colPivHouseholderQr().solve(y_obs);
  double sigma2 = std::max(1e-12, (y_obs - X * beta).squaredNorm() / static_cast<double>(n));
  VectorXd lambda = VectorXd::Ones(n);

  ChainOutput out;
  const int kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
  out.beta.resize(kept, p);
  out.sigma2.resize(kept);
  int stored = 0;
  for (int iter = 0; iter < config.iterations; ++iter) {
    const VectorXd resid = y_obs - X * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rate = 0.5 * (nu + resid(i) * resid(i) / sigma2);
      lambda(i) = rng.gamma(0.5 * (nu + 1.0), 1.0 / rate);
    }

    double wrss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) wrss += lambda(i) * resid(i) * resid(i);
    if (prior.coupling == PriorCoupling::Independent) {
      sigma2 = rng.inverse_gamma(prior.a0 + 0.5 * static_cast<double>(n),
                                 prior.b0 + 0.5 * wrss);
    } else {
      const VectorXd d = beta - prior.mu0;
      sigma2 = rng.inverse_gamma(prior.a0 + 0.5 * static_cast<double>(n + p),
                                 prior.b0 + 0.5 * (wrss + d.dot(L0 * d)));
    }

    const MatrixXd Xl = X.array().colwise() * lambda.array();
    MatrixXd prec;
    VectorXd lin;
    if (prior.coupling == PriorCoupling::Independent) {
      prec = L0 + Xl.transpose() * X / sigma2;
      lin = L0 * prior.mu0 + Xl.transpose() * y_obs / sigma2;
    } else {
      prec = (L0 + Xl.transpose() * X) / sigma2;
      lin = (L0 * prior.mu0 + Xl.transpose() * y_obs) / sigma2;
    }
    Eigen::LLT<MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw NumericalPD("run_student_t_baseline: precision not PD");
    VectorXd z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
    beta = llt.solve(lin) + llt.matrixU().solve(z);

    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      out.beta.row(stored) = beta.transpose();
      out.sigma2(stored) = sigma2;
      ++stored;
    }
  }
  out.beta.conservativeResize(stored, Eigen::NoChange);
  out.sigma2.conservativeResize(stored);
  out.augmented_final = Dataset{y_obs, X, Provenance::Observed};
  out.attempted = config.iterations;
  out.accepted = config.iterations;
  out.acceptance_rate = 1.0;
  return out;
}

HierarchicalOutput run_hierarchical(const std::vector<Dataset>& groups, HierarchicalPrior hyper,
                                    const EstimatorSpec& spec, const ChainConfig& config,
                                    FitMode mode) {
  config.validate();
  const Eigen::Index I = static_cast<Eigen::Index>(groups.size());
  if (I < 3) throw ImproperPosterior("run_hierarchical: need at least 3 groups");
  if (!(hyper.a_s > 0.0) || !(hyper.b_s > 0.0))
    throw ConfigError("run_hierarchical: a_s, b_s must be positive");
  for (const auto& g : groups) {
    if (g.n() < 3) throw TooFewRows("run_hierarchical: each group needs n >= 3");
    if (g.p() != 1 || (g.X.array() != 1.0).any())
      throw ConfigError("run_hierarchical: groups must be location-scale (ones design)");
  }

  RngStream hyper_rng(config.seed);
  std::vector<RngStream> group_rng;
  group_rng.reserve(static_cast<size_t>(I));
  for (Eigen::Index i = 0; i < I; ++i)
    group_rng.push_back(hyper_rng.substream(static_cast<std::uint64_t>(i) + 1));

  struct Group {
    GeometryCache geom;
    SummaryStatistic target;
    AugmentedState state;
    double theta = 0.0;
    double sigma2 = 1.0;
    std::int64_t accepted = 0;
    std::int64_t attempted = 0;
    int failures = 0;
  };
  std::vector<Group> gs(static_cast<size_t>(I));
  for (Eigen::Index i = 0; i < I; ++i) {
    auto& g = gs[static_cast<size_t>(i)];
    g.geom = build_geometry(groups[static_cast<size_t>(i)].X);
    g.target = irls_solve(groups[static_cast<size_t>(i)], tightened(spec));
    g.state.data = groups[static_cast<size_t>(i)];
    g.state.data.provenance = Provenance::Augmented;
    if (mode == FitMode::Restricted)
      g.state.eval = proposal_log_density(g.state.data, g.target, spec, g.geom,
                                          SphereBase::uniform());
    g.theta = g.target.b(0);
    g.sigma2 = g.target.s * g.target.s;
  }

  double mu = 0.0, tau2 = 0.0;
  for (const auto& g : gs) mu += g.theta;
  mu /= static_cast<double>(I);
  for (const auto& g : gs) tau2 += (g.theta - mu) * (g.theta - mu);
  tau2 = std::max(tau2 / static_cast<double>(I - 1), 1e-8);

  HierarchicalOutput out;
  const int kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
  out.theta.resize(kept, I);
  out.sigma2.resize(kept, I);
  out.mu.resize(kept);
  out.tau2.resize(kept);
  int stored = 0;

  for (int iter = 0; iter < config.iterations; ++iter) {
    for (Eigen::Index i = 0; i < I; ++i) {
      auto& g = gs[static_cast<size_t>(i)];
      auto& rng = group_rng[static_cast<size_t>(i)];

      if (mode == FitMode::Restricted) {
        const ThetaState th{VectorXd::Constant(1, g.theta), g.sigma2};
        const bool acc = mh_step_cached(g.state, th, g.target, spec, g.geom, config, rng,
                                        &g.failures);
        g.attempted += 1;
        g.accepted += acc ? 1 : 0;

        if (config.repair_interval > 0 && (iter + 1) % config.repair_interval == 0) {
          const SummaryStatistic cur = irls_solve(g.state.data, tightened(spec), g.target);
          const double dev = std::max((cur.b - g.target.b).cwiseAbs().maxCoeff(),
                                      std::abs(cur.s - g.target.s));
          if (dev > 10.0 * spec.tol) {
            const SphereSample z = inverse_h(g.state.data, g.geom);
            g.state.data = h_transform(z.z_star, g.target, spec, g.state.data.X);
            g.state.eval = proposal_log_density(g.state.data, g.target, spec, g.geom,
                                                SphereBase::uniform());
          }
        }
      }

      // theta_i | y_i, mu, tau2, sigma_i^2
      const VectorXd& yi = g.state.data.y;
      const double ni = static_cast<double>(yi.size());
      const double prec = ni / g.sigma2 + 1.0 / tau2;
      const double mean = (yi.sum() / g.sigma2 + mu / tau2) / prec;
      g.theta = mean + rng.normal() / std::sqrt(prec);

      // sigma_i^2 | y_i, theta_i
      const double rss = (yi.array() - g.theta).square().sum();
      g.sigma2 = rng.inverse_gamma(hyper.a_s + 0.5 * ni, hyper.b_s + 0.5 * rss);
    }

    // mu, tau2 | theta under pi(mu, tau2) propto tau^-2
    double theta_bar = 0.0;
    for (const auto& g : gs) theta_bar += g.theta;
    theta_bar /= static_cast<double>(I);
    mu = theta_bar + hyper_rng.normal() * std::sqrt(tau2 / static_cast<double>(I));
    double ss = 0.0;
    for (const auto& g : gs) ss += (g.theta - mu) * (g.theta - mu);
    tau2 = hyper_rng.inverse_gamma(0.5 * static_cast<double>(I), 0.5 * ss);

    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      for (Eigen::Index i = 0; i < I; ++i) {
        out.theta(stored, i) = gs[static_cast<size_t>(i)].theta;
        out.sigma2(stored, i) = gs[static_cast<size_t>(i)].sigma2;
      }
      out.mu(stored) = mu;
      out.tau2(stored) = tau2;
      ++stored;
    }
  }
  out.theta.conservativeResize(stored, Eigen::NoChange);
  out.sigma2.conservativeResize(stored, Eigen::NoChange);
  out.mu.conservativeResize(stored);
  out.tau2.conservativeResize(stored);
  for (const auto& g : gs)
    out.acceptance_rate.push_back(
        g.attempted > 0 ? static_cast<double>(g.accepted) / static_cast<double>(g.attempted)
                        : 1.0);
  return out;
}

}  // namespace brl
