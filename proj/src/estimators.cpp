#include "brl/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "brl/quadrature.hpp"

namespace brl {

double PsiFamily::psi(double u) const {
  switch (kind) {
    case PsiKind::LeastSquares:
      return u;
    case PsiKind::Huber:
      if (u > tuning) return tuning;
      if (u < -tuning) return -tuning;
      return u;
    case PsiKind::Tukey: {
      if (std::abs(u) > tuning) return 0.0;
      const double t = u / tuning;
      const double g = 1.0 - t * t;
      return u * g * g;
    }
  }
  return u;
}

double PsiFamily::dpsi(double u) const {
  switch (kind) {
    case PsiKind::LeastSquares:
      return 1.0;
    case PsiKind::Huber:
      // one-sided derivative from the interior at |u| == k
      return std::abs(u) <= tuning ? 1.0 : 0.0;
    case PsiKind::Tukey: {
      if (std::abs(u) > tuning) return 0.0;
      const double t = (u / tuning) * (u / tuning);
      return (1.0 - t) * (1.0 - 5.0 * t);
    }
  }
  return 1.0;
}

double PsiFamily::weight(double u) const {
  switch (kind) {
    case PsiKind::LeastSquares:
      return 1.0;
    case PsiKind::Huber:
      return std::abs(u) <= tuning ? 1.0 : tuning / std::abs(u);
    case PsiKind::Tukey: {
      if (std::abs(u) > tuning) return 0.0;
      const double g = 1.0 - (u / tuning) * (u / tuning);
      return g * g;
    }
  }
  return 1.0;
}

double ChiFamily::chi(double u) const {
  switch (kind) {
    case ChiKind::HuberProposal2: {
      const double v = std::min(std::abs(u), tuning);
      return v * v - centering;
    }
    case ChiKind::SdMoment:
      return u * u - 1.0;
  }
  return u * u - 1.0;
}

double ChiFamily::dchi(double u) const {
  switch (kind) {
    case ChiKind::HuberProposal2:
      return std::abs(u) <= tuning ? 2.0 * u : 0.0;
    case ChiKind::SdMoment:
      return 2.0 * u;
  }
  return 2.0 * u;
}

double chi_centering(double k) {
  if (!(k > 0.0)) throw ConfigError("chi_centering: k must be > 0");
  // E[min(|Z|,k)^2] = 2 Phi(k) - 1 - 2 k phi(k) + 2 k^2 (1 - Phi(k))
  const double tail = 1.0 - norm_cdf(k);
  return 2.0 * norm_cdf(k) - 1.0 - 2.0 * k * norm_pdf(k) + 2.0 * k * k * tail;
}

double normal_efficiency(PsiKind kind, double tuning) {
  switch (kind) {
    case PsiKind::LeastSquares:
      return 1.0;
    case PsiKind::Huber: {
      const double num = 2.0 * norm_cdf(tuning) - 1.0;
      return num * num / chi_centering(tuning);
    }
    case PsiKind::Tukey: {
      PsiFamily psi{PsiKind::Tukey, tuning};
      const double i1 =
          2.0 * adaptive_simpson([&](double u) { return psi.dpsi(u) * norm_pdf(u); }, 0.0,
                                 tuning, 1e-13);
      const double i2 =
          2.0 * adaptive_simpson([&](double u) { const double v = psi.psi(u);
                                                 return v * v * norm_pdf(u); },
                                 0.0, tuning, 1e-13);
      return i1 * i1 / i2;
    }
  }
  return 1.0;
}

double solve_tuning(PsiKind kind, double efficiency) {
  if (kind == PsiKind::LeastSquares)
    throw ConfigError("solve_tuning: least squares has no tuning constant");
  if (!(efficiency > 0.5 && efficiency < 0.9999))
    throw ConfigError("solve_tuning: efficiency must lie in (0.5, 0.9999)");

  double lo = kind == PsiKind::Huber ? 1e-3 : 0.5;
  double hi = kind == PsiKind::Huber ? 50.0 : 100.0;
  double eff_lo = normal_efficiency(kind, lo);
  double eff_hi = normal_efficiency(kind, hi);
  if (efficiency < eff_lo || efficiency > eff_hi)
    throw NoBracket("solve_tuning: efficiency " + std::to_string(efficiency) +
                    " outside attainable range [" + std::to_string(eff_lo) + ", " +
                    std::to_string(eff_hi) + "]");

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double eff = normal_efficiency(kind, mid);
    if (std::abs(eff - efficiency) <= 1e-6) return mid;
    (eff < efficiency ? lo : hi) = mid;
  }
  throw NoConvergence("solve_tuning: bisection failed to reach 1e-6");
}

EstimatorSpec make_spec(PsiKind kind, double efficiency) {
  EstimatorSpec spec;
  if (kind == PsiKind::LeastSquares) {
    spec.psi = PsiFamily{PsiKind::LeastSquares, 0.0};
  } else {
    spec.psi = PsiFamily{kind, solve_tuning(kind, efficiency)};
  }
  const double k = solve_tuning(PsiKind::Huber, efficiency);
  spec.chi = ChiFamily{ChiKind::HuberProposal2, k, chi_centering(k)};
  return spec;
}

EstimatorSpec least_squares_spec() {
  EstimatorSpec spec;
  spec.psi = PsiFamily{PsiKind::LeastSquares, 0.0};
  spec.chi = ChiFamily{ChiKind::SdMoment, 0.0, 0.0};
  return spec;
}

namespace {

double median_inplace(std::vector<double>& v) {
  const size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (n % 2 == 0) {
    auto lower = std::max_element(v.begin(), mid);
    m = 0.5 * (m + *lower);
  }
  return m;
}

}  // namespace

double robust_scale_estimate(const VectorXd& v) {
  std::vector<double> buf(v.data(), v.data() + v.size());
  const double med = median_inplace(buf);
  for (auto& x : buf) x = std::abs(x - med);
  const double mad = median_inplace(buf);
  if (mad > 0.0) return 1.4826 * mad;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

SummaryStatistic irls_solve(const Dataset& data, const EstimatorSpec& spec,
                            std::optional<SummaryStatistic> init) {
  data.validate();
  spec.validate();
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double nd = static_cast<double>(n);

  const double scale_ref = robust_scale_estimate(data.y);

  VectorXd b;
  double s;
  if (init) {
    if (!(init->s > 0.0)) throw ConfigError("irls_solve: init scale must be > 0");
    b = init->b;
    s = init->s;
  } else {
    b = data.X.colPivHouseholderQr().solve(data.y);
    s = robust_scale_estimate(data.y - data.X * b);
  }
  if (!(s > 1e-12 * scale_ref) || !(s > 0.0))
    throw ZeroScale("irls_solve: degenerate starting scale");

  VectorXd r(n), w(n);
  for (int iter = 0; iter < spec.max_iter; ++iter) {
    r = (data.y - data.X * b) / s;

    double eq_s = 0.0;
    VectorXd eq_b = VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i) {
      eq_b += spec.psi.psi(r(i)) * data.X.row(i).transpose();
      eq_s += spec.chi.chi(r(i));
    }
    if (eq_b.cwiseAbs().maxCoeff() / nd <= spec.tol && std::abs(eq_s) / nd <= spec.tol)
      return SummaryStatistic{b, s};

    // coefficient step: weighted least squares with w = psi(r)/r
    for (Eigen::Index i = 0; i < n; ++i) w(i) = spec.psi.weight(r(i));
    const MatrixXd Xw = data.X.array().colwise() * w.array();
    const MatrixXd XtWX = Xw.transpose() * data.X;
    Eigen::LDLT<MatrixXd> ldlt(XtWX);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
      throw NoConvergence("irls_solve: weighted normal equations singular (weights vanished)");
    b = ldlt.solve(Xw.transpose() * data.y);

    // scale step
    r = (data.y - data.X * b) / s;
    if (spec.chi.kind == ChiKind::HuberProposal2) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = std::min(std::abs(r(i)), spec.chi.tuning);
        acc += v * v;
      }
      s *= std::sqrt(acc / (nd * spec.chi.centering));
    } else {
      s *= std::sqrt(r.squaredNorm() / nd);
    }
    if (!(s > 1e-12 * scale_ref))
      throw ZeroScale("irls_solve: residual scale collapsed");
  }
  throw NoConvergence("irls_solve: no convergence in " + std::to_string(spec.max_iter) +
                      " iterations");
}

double estimating_equation_residual(const Dataset& data, const EstimatorSpec& spec,
                                    const SummaryStatistic& stat) {
  const Eigen::Index n = data.n();
  const double nd = static_cast<double>(n);
  const VectorXd r = (data.y - data.X * stat.b) / stat.s;
  VectorXd eq_b = VectorXd::Zero(data.p());
  double eq_s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    eq_b += spec.psi.psi(r(i)) * data.X.row(i).transpose();
    eq_s += spec.chi.chi(r(i));
  }
  return std::max(eq_b.cwiseAbs().maxCoeff() / nd, std::abs(eq_s) / nd);
}

StatisticGradients statistic_gradients(const Dataset& data, const EstimatorSpec& spec,
                                       const SummaryStatistic& stat) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (!(stat.s > 0.0)) throw ZeroScale("statistic_gradients: scale must be > 0");

  const VectorXd r = (data.y - data.X * stat.b) / stat.s;

  // Differentiating the estimating equations in y_j gives, per column j,
  //   [ sum psi'_i x_i x_i^T   sum psi'_i r_i x_i ] [db/dy_j]   [psi'_j x_j]
  //   [ sum chi'_i x_i^T       sum chi'_i r_i     ] [ds/dy_j] = [chi'_j    ]
  MatrixXd M = MatrixXd::Zero(p + 1, p + 1);
  MatrixXd rhs(p + 1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dp = spec.psi.dpsi(r(i));
    const double dc = spec.chi.dchi(r(i));
    const VectorXd xi = data.X.row(i).transpose();
    M.topLeftCorner(p, p) += dp * xi * xi.transpose();
    M.block(0, p, p, 1) += dp * r(i) * xi;
    M.block(p, 0, 1, p) += dc * xi.transpose();
    M(p, p) += dc * r(i);
    rhs.block(0, i, p, 1) = dp * xi;
    rhs(p, i) = dc;
  }

  Eigen::JacobiSVD<MatrixXd> svd(M);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw SingularImplicitSystem("statistic_gradients: condition number above 1e12");

  const MatrixXd G = M.partialPivLu().solve(rhs);  // (p+1) x n
  StatisticGradients out;
  out.grad_b = G.topRows(p).transpose();
  out.grad_s = G.row(p).transpose();
  return out;
}

MatrixXd normal_space_basis(const StatisticGradients& grads, const GeometryCache& geom) {
  const Eigen::Index n = grads.grad_s.size();
  const Eigen::Index p = grads.grad_b.cols();
  if (n != geom.n || p != geom.p)
    throw ConfigError("normal_space_basis: gradient/geometry dimension mismatch");
  MatrixXd V(n, p + 1);
  V.leftCols(p) = grads.grad_b;
  V.col(p) = grads.grad_s;
  return orthonormalize(V);
}

}  // namespace brl
