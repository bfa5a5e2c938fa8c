#include "brl/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "brl/quadrature.hpp"

namespace brl {

namespace {

double log_t_pdf(double y, double loc, double sigma2, double nu) {
  const double z2 = (y - loc) * (y - loc) / sigma2;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI * sigma2) - 0.5 * (nu + 1.0) * std::log1p(z2 / nu);
}

}  // namespace

double PredictiveDensity::log_density(double y) const {
  const Eigen::Index S = means.size();
  double max_term = -std::numeric_limits<double>::infinity();
  VectorXd terms(S);
  for (Eigen::Index s = 0; s < S; ++s) {
    terms(s) = nu > 0.0 ? log_t_pdf(y, means(s), sigma2(s), nu)
                        : log_norm_pdf(y, means(s), sigma2(s));
    max_term = std::max(max_term, terms(s));
  }
  double acc = 0.0;
  for (Eigen::Index s = 0; s < S; ++s) acc += std::exp(terms(s) - max_term);
  return max_term + std::log(acc / static_cast<double>(S));
}

std::pair<double, double> PredictiveDensity::central_interval(double mass) const {
  const double lo_mean = means.minCoeff();
  const double hi_mean = means.maxCoeff();
  const double sd = std::sqrt(sigma2.maxCoeff());
  const double pad = (nu > 0.0 ? 40.0 : 12.0) * sd;
  const double a = lo_mean - pad, b = hi_mean + pad;
  const int grid = 4001;
  const double h = (b - a) / (grid - 1);
  std::vector<double> cdf(grid, 0.0);
  double prev = density(a);
  for (int i = 1; i < grid; ++i) {
    const double cur = density(a + i * h);
    cdf[static_cast<size_t>(i)] = cdf[static_cast<size_t>(i - 1)] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  const double total = cdf.back();
  auto invert = [&](double q) {
    const double target = q * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const auto idx = static_cast<double>(std::distance(cdf.begin(), it));
    return a + idx * h;
  };
  const double tail = 0.5 * (1.0 - mass);
  return {invert(tail), invert(1.0 - tail)};
}

PredictiveDensity predictive_density(const ChainOutput& draws, const VectorXd& x_new) {
  const Eigen::Index S = draws.sigma2.size();
  if (S < 100) throw TooFewDraws("predictive_density: need at least 100 draws");
  PredictiveDensity pd;
  pd.means = draws.beta * x_new;
  pd.sigma2 = draws.sigma2;
  return pd;
}

PredictiveDensity predictive_density_t(const ChainOutput& draws, const VectorXd& x_new,
                                       double nu) {
  PredictiveDensity pd = predictive_density(draws, x_new);
  pd.nu = nu;
  return pd;
}

PredictiveDensity plug_in_predictive(double mean, double sigma2) {
  PredictiveDensity pd;
  pd.means = VectorXd::Constant(1, mean);
  pd.sigma2 = VectorXd::Constant(1, sigma2);
  return pd;
}

double kl_good_data(const PredictiveDensity& pred, double theta, double sigma2) {
  if (!(sigma2 > 0.0)) throw ConfigError("kl_good_data: truth variance must be > 0");
  const double sd = std::sqrt(sigma2);
  auto integrand = [&](double y) {
    const double lt = log_norm_pdf(y, theta, sigma2);
    return std::exp(lt) * (lt - pred.log_density(y));
  };
  return adaptive_simpson(integrand, theta - 10.0 * sd, theta + 10.0 * sd, 1e-5);
}

void SimulationDesign::validate() const {
  for (double p : p_levels)
    if (p < 0.0 || p >= 1.0) throw ConfigError("SimulationDesign: need 0 <= p < 1");
  for (double m : m_levels)
    if (m <= 1.0) throw ConfigError("SimulationDesign: need m > 1");
  for (int n : n_levels)
    if (n < 3) throw ConfigError("SimulationDesign: need n >= 3");
  if (replicates < 1 || K < 1) throw ConfigError("SimulationDesign: counts must be positive");
  if (!(tau2 > 0.0) || !(sigma2 > 0.0)) throw ConfigError("SimulationDesign: variances > 0");
}

std::vector<SimulatedGroup> simulate_dataset(const SimulationDesign& design, RngStream& rng) {
  design.validate();
  std::vector<SimulatedGroup> groups;
  groups.reserve(static_cast<size_t>(design.groups_per_dataset()));
  const double tau = std::sqrt(design.tau2);
  const double sd = std::sqrt(design.sigma2);
  for (int rep = 0; rep < design.replicates; ++rep) {
    for (double p : design.p_levels) {
      for (double m : design.m_levels) {
        for (int n : design.n_levels) {
          SimulatedGroup g;
          g.theta = design.mu + tau * rng.normal();
          g.p = p;
          g.m = m;
          g.n = n;
          g.y.resize(n);
          const double sd_bad = sd * std::sqrt(m);
          for (int j = 0; j < n; ++j) {
            const double s = rng.uniform() < p ? sd_bad : sd;
            g.y(j) = g.theta + s * rng.normal();
          }
          groups.push_back(std::move(g));
        }
      }
    }
  }
  return groups;
}

std::vector<std::vector<SimulatedGroup>> simulate_contaminated(const SimulationDesign& design,
                                                               RngStream& rng) {
  std::vector<std::vector<SimulatedGroup>> out;
  out.reserve(static_cast<size_t>(design.K));
  for (int k = 0; k < design.K; ++k) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(k));
    out.push_back(simulate_dataset(design, sub));
  }
  return out;
}

TLMScores tlm_score(const std::map<std::string, std::vector<double>>& holdout_logdens,
                    const std::string& base, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("tlm_score: need 0 <= alpha < 1");
  const auto base_it = holdout_logdens.find(base);
  if (base_it == holdout_logdens.end()) throw ConfigError("tlm_score: unknown base method");
  const std::vector<double>& base_vals = base_it->second;
  const int M = static_cast<int>(base_vals.size());
  for (const auto& [name, vals] : holdout_logdens)
    if (static_cast<int>(vals.size()) != M)
      throw ConfigError("tlm_score: method " + name + " scored on a different case count");

  const int trimmed = static_cast<int>(std::floor(alpha * M));
  if (trimmed >= M) throw EmptyAfterTrim("tlm_score: floor(alpha*M) >= M");

  std::vector<int> order(static_cast<size_t>(M));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return base_vals[static_cast<size_t>(a)] < base_vals[static_cast<size_t>(b)];
  });

  TLMScores out;
  out.trimmed = trimmed;
  out.kept = M - trimmed;
  for (const auto& [name, vals] : holdout_logdens) {
    double acc = 0.0;
    for (int i = trimmed; i < M; ++i) acc += vals[static_cast<size_t>(order[static_cast<size_t>(i)])];
    out.score[name] = acc / static_cast<double>(out.kept);
  }
  return out;
}

TLMReport aggregate_tlm(std::vector<TLMScores> splits, const std::string& base, double alpha) {
  TLMReport rep;
  rep.alpha = alpha;
  rep.base = base;
  rep.splits = std::move(splits);
  if (rep.splits.empty()) return rep;
  const double K = static_cast<double>(rep.splits.size());
  for (const auto& [name, _] : rep.splits.front().score) {
    double mean = 0.0;
    for (const auto& s : rep.splits) mean += s.score.at(name);
    mean /= K;
    double var = 0.0;
    for (const auto& s : rep.splits) var += (s.score.at(name) - mean) * (s.score.at(name) - mean);
    rep.mean[name] = mean;
    rep.sd[name] = rep.splits.size() > 1 ? std::sqrt(var / (K - 1.0)) : 0.0;
  }
  return rep;
}

std::pair<std::vector<int>, std::vector<int>> crossval_split(
    int n_cases, double fraction, const std::vector<int>* strata, RngStream& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("crossval_split: bad fraction");
  std::map<int, std::vector<int>> by_stratum;
  for (int i = 0; i < n_cases; ++i)
    by_stratum[strata ? strata->at(static_cast<size_t>(i)) : 0].push_back(i);

  std::vector<int> train, holdout;
  for (auto& [label, idx] : by_stratum) {
    const int size = static_cast<int>(idx.size());
    if (size < 2)
      throw StratumTooSmall("crossval_split: stratum " + std::to_string(label) +
                            " has fewer than 2 cases");
    int take = static_cast<int>(std::lround(fraction * size));
    take = std::clamp(take, 1, size - 1);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    for (int i = 0; i < size; ++i)
      (i < take ? train : holdout).push_back(idx[static_cast<size_t>(i)]);
  }
  std::sort(train.begin(), train.end());
  std::sort(holdout.begin(), holdout.end());
  return {train, holdout};
}

std::string fitter_name(StudyFitter f) {
  switch (f) {
    case StudyFitter::RestrictedHuber: return "restricted_huber";
    case StudyFitter::RestrictedTukey: return "restricted_tukey";
    case StudyFitter::NormalTheory: return "normal_theory";
    case StudyFitter::ClassicalHuber: return "classical_huber";
    case StudyFitter::ClassicalTukey: return "classical_tukey";
  }
  return "unknown";
}

namespace {

bool fitter_is_bayesian(StudyFitter f) {
  return f == StudyFitter::RestrictedHuber || f == StudyFitter::RestrictedTukey ||
         f == StudyFitter::NormalTheory;
}

bool fitter_uses_prior(StudyFitter f) { return fitter_is_bayesian(f); }

/// One (dataset, fitter, prior) cell: per-group KL values.
std::vector<KLCell> score_cell(const std::vector<SimulatedGroup>& groups, StudyFitter fitter,
                               int prior_index, const StudyPrior& prior, int dataset_index,
                               const SimulationDesign& design, const ChainConfig& chain_base,
                               std::uint64_t cell_seed) {
  std::vector<KLCell> cells;
  const int I = static_cast<int>(groups.size());
  cells.reserve(static_cast<size_t>(I));

  auto push = [&](int g, double kl, bool failed) {
    cells.push_back({fitter_name(fitter), prior_index, dataset_index, g, kl, failed});
  };

  try {
    if (fitter_is_bayesian(fitter)) {
      std::vector<Dataset> ds;
      ds.reserve(static_cast<size_t>(I));
      for (const auto& g : groups)
        ds.push_back(Dataset{g.y, MatrixXd::Ones(g.y.size(), 1), Provenance::Observed});

      EstimatorSpec spec = fitter == StudyFitter::RestrictedTukey ? make_spec(PsiKind::Tukey)
                                                                  : make_spec(PsiKind::Huber);
      ChainConfig chain = chain_base;
      chain.seed = cell_seed;
      const FitMode mode =
          fitter == StudyFitter::NormalTheory ? FitMode::FullData : FitMode::Restricted;
      const HierarchicalOutput fit =
          run_hierarchical(ds, HierarchicalPrior{prior.a_s, prior.b_s()}, spec, chain, mode);

      for (int g = 0; g < I; ++g) {
        PredictiveDensity pd;
        pd.means = fit.theta.col(g);
        pd.sigma2 = fit.sigma2.col(g);
        if (pd.means.size() < 100) throw TooFewDraws("study cell: too few draws");
        push(g, kl_good_data(pd, groups[static_cast<size_t>(g)].theta, design.sigma2), false);
      }
    } else {
      const EstimatorSpec spec = fitter == StudyFitter::ClassicalTukey
                                     ? make_spec(PsiKind::Tukey)
                                     : make_spec(PsiKind::Huber);
      for (int g = 0; g < I; ++g) {
        const auto& grp = groups[static_cast<size_t>(g)];
        try {
          const Dataset d{grp.y, MatrixXd::Ones(grp.y.size(), 1), Provenance::Observed};
          const SummaryStatistic stat = irls_solve(d, spec);
          const PredictiveDensity pd = plug_in_predictive(stat.b(0), stat.s * stat.s);
          push(g, kl_good_data(pd, grp.theta, design.sigma2), false);
        } catch (const Error&) {
          push(g, std::numeric_limits<double>::quiet_NaN(), true);
        }
      }
    }
  } catch (const Error&) {
    cells.clear();
    for (int g = 0; g < I; ++g) push(g, std::numeric_limits<double>::quiet_NaN(), true);
  }
  return cells;
}

}  // namespace

KLReport run_simulation_study(const StudyConfig& config) {
  config.design.validate();
  RngStream rng(config.seed);
  const auto datasets = simulate_contaminated(config.design, rng);
  const int K = config.design.K;

  struct CellSpec {
    int dataset;
    StudyFitter fitter;
    int prior_index;  // -1 for classical fits
  };
  std::vector<CellSpec> todo;
  for (int k = 0; k < K; ++k) {
    for (const auto f : config.fitters) {
      if (fitter_uses_prior(f)) {
        for (int pi = 0; pi < static_cast<int>(config.priors.size()); ++pi)
          todo.push_back({k, f, pi});
      } else {
        todo.push_back({k, f, -1});
      }
    }
  }

  std::vector<std::vector<KLCell>> results(todo.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const CellSpec& c = todo[i];
      const StudyPrior prior = c.prior_index >= 0 ? config.priors[static_cast<size_t>(c.prior_index)]
                                                  : StudyPrior{};
      const std::uint64_t cell_seed = RngStream::substream_seed(config.seed, 1000 + i);
      results[i] = score_cell(datasets[static_cast<size_t>(c.dataset)], c.fitter,
                              std::max(c.prior_index, 0), prior, c.dataset, config.design,
                              config.chain, cell_seed);
    }
  };
  const int workers = std::max(1, config.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  KLReport report;
  for (const auto& r : results) report.cells.insert(report.cells.end(), r.begin(), r.end());

  // Aggregates: mean over all groups/datasets; SE over per-dataset means.
  struct Key {
    std::string method;
    int prior_index;
    bool operator<(const Key& o) const {
      return std::tie(method, prior_index) < std::tie(o.method, o.prior_index);
    }
  };
  std::map<Key, std::map<int, std::vector<double>>> by_cell;  // key -> dataset -> values
  for (const auto& c : report.cells)
    if (!c.failed) by_cell[{c.method, c.prior_index}][c.dataset].push_back(c.kl);

  for (const auto& [key, per_dataset] : by_cell) {
    std::vector<double> replicate_means;
    double total = 0.0;
    int count = 0;
    for (const auto& [k, vals] : per_dataset) {
      double m = 0.0;
      for (double v : vals) m += v;
      replicate_means.push_back(m / static_cast<double>(vals.size()));
      total += m;
      count += static_cast<int>(vals.size());
    }
    KLAggregate agg;
    agg.method = key.method;
    agg.prior_index = key.prior_index;
    agg.mean = total / static_cast<double>(count);
    const double Kd = static_cast<double>(replicate_means.size());
    double var = 0.0;
    const double rm = std::accumulate(replicate_means.begin(), replicate_means.end(), 0.0) / Kd;
    for (double v : replicate_means) var += (v - rm) * (v - rm);
    agg.se = replicate_means.size() > 1 ? std::sqrt(var / (Kd * (Kd - 1.0))) : 0.0;
    report.aggregates.push_back(agg);
  }

  // Main-effect means per factor level.
  auto group_meta = [&](int dataset, int group) -> const SimulatedGroup& {
    return datasets[static_cast<size_t>(dataset)][static_cast<size_t>(group)];
  };
  auto main_effect = [&](const std::string& factor, auto level_of) {
    std::map<Key, std::map<double, std::map<int, std::vector<double>>>> bucket;
    for (const auto& c : report.cells) {
      if (c.failed) continue;
      bucket[{c.method, c.prior_index}][level_of(group_meta(c.dataset, c.group))][c.dataset]
          .push_back(c.kl);
    }
    for (const auto& [key, levels] : bucket) {
      for (const auto& [level, per_dataset] : levels) {
        std::vector<double> means;
        for (const auto& [k, vals] : per_dataset) {
          double m = 0.0;
          for (double v : vals) m += v;
          means.push_back(m / static_cast<double>(vals.size()));
        }
        const double Kd = static_cast<double>(means.size());
        const double mean = std::accumulate(means.begin(), means.end(), 0.0) / Kd;
        double var = 0.0;
        for (double v : means) var += (v - mean) * (v - mean);
        report.main_effects.push_back(
            {key.method, key.prior_index, factor, level, mean,
             means.size() > 1 ? std::sqrt(var / (Kd * (Kd - 1.0))) : 0.0});
      }
    }
  };
  main_effect("n", [](const SimulatedGroup& g) { return static_cast<double>(g.n); });
  main_effect("p", [](const SimulatedGroup& g) { return g.p; });
  main_effect("m", [](const SimulatedGroup& g) { return g.m; });

  return report;
}

}  // namespace brl
