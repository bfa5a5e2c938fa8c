#pragma once

// Test-only reference implementation of the simultaneous M-estimator: damped
// Newton with a numeric Jacobian on the raw estimating equations, multi-start.
// Independent of the IRLS path in the library; the score functions are
// re-implemented here on purpose.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace brl::test {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class RefPsi { Huber, Tukey, LeastSquares };
enum class RefChi { Proposal2, SdMoment };

struct RefEstimator {
  RefPsi psi = RefPsi::Huber;
  RefChi chi = RefChi::Proposal2;
  double k_psi = 1.345;
  double k_chi = 1.345;
  double beta_k = 0.0;  // E[min(|Z|, k_chi)^2]
};

inline double ref_psi(const RefEstimator& e, double u) {
  switch (e.psi) {
    case RefPsi::LeastSquares:
      return u;
    case RefPsi::Huber:
      return u > e.k_psi ? e.k_psi : (u < -e.k_psi ? -e.k_psi : u);
    case RefPsi::Tukey: {
      if (std::abs(u) > e.k_psi) return 0.0;
      const double t = u / e.k_psi;
      return u * (1.0 - t * t) * (1.0 - t * t);
    }
  }
  return u;
}

inline double ref_chi(const RefEstimator& e, double u) {
  if (e.chi == RefChi::SdMoment) return u * u - 1.0;
  const double v = std::min(std::abs(u), e.k_chi);
  return v * v - e.beta_k;
}

inline VectorXd ref_equations(const RefEstimator& e, const VectorXd& y, const MatrixXd& X,
                              const VectorXd& b, double s) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = X.cols();
  VectorXd F = VectorXd::Zero(p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (y(i) - X.row(i).dot(b)) / s;
    F.head(p) += ref_psi(e, r) * X.row(i).transpose();
    F(p) += ref_chi(e, r);
  }
  return F / static_cast<double>(n);
}

/// Damped Newton from one start. Returns (b, s) when the scaled equations
/// reach 1e-13 in max-norm.
inline std::optional<std::pair<VectorXd, double>> ref_newton(
    const RefEstimator& e, const VectorXd& y, const MatrixXd& X, VectorXd b, double s) {
  const Eigen::Index p = X.cols();
  for (int iter = 0; iter < 400; ++iter) {
    const VectorXd F = ref_equations(e, y, X, b, s);
    if (F.cwiseAbs().maxCoeff() < 1e-13) return std::make_pair(b, s);

    MatrixXd J(p + 1, p + 1);
    const double hb = 1e-7 * std::max(1.0, b.cwiseAbs().maxCoeff());
    const double hs = 1e-7 * s;
    for (Eigen::Index j = 0; j < p; ++j) {
      VectorXd bp = b, bm = b;
      bp(j) += hb;
      bm(j) -= hb;
      J.col(j) = (ref_equations(e, y, X, bp, s) - ref_equations(e, y, X, bm, s)) / (2 * hb);
    }
    J.col(p) = (ref_equations(e, y, X, b, s + hs) - ref_equations(e, y, X, b, s - hs)) / (2 * hs);

    const VectorXd step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) return std::nullopt;

    double lambda = 1.0;
    const double f0 = F.norm();
    bool moved = false;
    for (int half = 0; half < 40; ++half) {
      const VectorXd bt = b + lambda * step.head(p);
      const double st = s + lambda * step(p);
      if (st > 1e-10) {
        const double ft = ref_equations(e, y, X, bt, st).norm();
        if (ft < f0) {
          b = bt;
          s = st;
          moved = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!moved) return std::nullopt;
  }
  return std::nullopt;
}

/// Multi-start reference solve.
inline std::optional<std::pair<VectorXd, double>> reference_mestimate(
    const RefEstimator& e, const VectorXd& y, const MatrixXd& X) {
  const VectorXd b0 = X.colPivHouseholderQr().solve(y);
  VectorXd resid = y - X * b0;
  const double sd = std::sqrt(resid.squaredNorm() / static_cast<double>(y.size()));
  std::vector<double> scale_starts{sd, 0.5 * sd, 2.0 * sd, 0.1 * sd};
  for (double s0 : scale_starts) {
    if (!(s0 > 0.0)) continue;
    if (auto sol = ref_newton(e, y, X, b0, s0)) return sol;
  }
  return std::nullopt;
}

}  // namespace brl::test
