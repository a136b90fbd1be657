#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"

namespace abcr {

// Fitted local-linear correction m(S) = beta0 + B'(S - S0). ridge_used stays 0
// unless the normal equations were near-singular. oracle_adjustment() leaves
// S0 empty; fill it before calling adjust_samples with such a model.
struct AdjustmentModel {
  Eigen::VectorXd beta0;  // d
  Eigen::MatrixXd B;      // k x d
  SummaryVector S0;
  double ridge_used = 0.0;
};

// Least-squares fit of theta on the summaries over the accepted draws,
// solved on centered data: Cov(S) B = Cov(S, theta). The unknown theta0 of
// the population contrast is absorbed into beta0.
inline AdjustmentModel fit_local_linear(const ReferenceTable& table) {
  const std::size_t T = table.draws.size();
  const auto k = static_cast<Eigen::Index>(table.observed_summary.size());
  if (k < 1) throw DimensionError("fit_local_linear: table has no observed summary");
  if (T < static_cast<std::size_t>(k) + 2)
    throw InsufficientDataError("fit_local_linear: need at least k + 2 accepted draws, got " +
                                std::to_string(T));
  const auto d = static_cast<Eigen::Index>(table.draws.front().theta.size());

  Eigen::VectorXd s_mean = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd t_mean = Eigen::VectorXd::Zero(d);
  for (const auto& dr : table.draws) {
    for (Eigen::Index j = 0; j < k; ++j) s_mean[j] += dr.summary[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < d; ++j) t_mean[j] += dr.theta[static_cast<std::size_t>(j)];
  }
  s_mean /= static_cast<double>(T);
  t_mean /= static_cast<double>(T);

  Eigen::MatrixXd css = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd cst = Eigen::MatrixXd::Zero(k, d);
  Eigen::VectorXd sc(k), tc(d);
  for (const auto& dr : table.draws) {
    for (Eigen::Index j = 0; j < k; ++j) sc[j] = dr.summary[static_cast<std::size_t>(j)] - s_mean[j];
    for (Eigen::Index j = 0; j < d; ++j) tc[j] = dr.theta[static_cast<std::size_t>(j)] - t_mean[j];
    css.selfadjointView<Eigen::Lower>().rankUpdate(sc);
    cst += sc * tc.transpose();
  }
  css = css.selfadjointView<Eigen::Lower>();

  if (css.trace() <= 0.0)
    throw DegenerateError("fit_local_linear: all summaries identical, design is degenerate");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(css);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  double ridge = 0.0;
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    ridge = 1e-10 * css.trace() / static_cast<double>(k);
    css.diagonal().array() += ridge;
  }

  AdjustmentModel m;
  m.B = css.ldlt().solve(cst);
  // beta0 = mean(theta) - B'(mean(S) - S0)
  Eigen::VectorXd s0(k);
  for (Eigen::Index j = 0; j < k; ++j) s0[j] = table.observed_summary[static_cast<std::size_t>(j)];
  m.beta0 = t_mean - m.B.transpose() * (s_mean - s0);
  m.S0 = table.observed_summary;
  m.ridge_used = ridge;
  return m;
}

// Corrected posterior samples theta'_t = theta_t - B'(S_t - S0).
inline std::vector<ParameterPoint> adjust_samples(const ReferenceTable& table,
                                                  const AdjustmentModel& model) {
  const auto k = static_cast<Eigen::Index>(model.S0.size());
  const auto d = static_cast<Eigen::Index>(model.beta0.size());
  if (model.B.rows() != k || model.B.cols() != d)
    throw DimensionError("adjust_samples: adjustment model has inconsistent dimensions");
  if (table.observed_summary.size() != static_cast<std::size_t>(k))
    throw DimensionError("adjust_samples: table summary dimension does not match model");

  std::vector<ParameterPoint> out;
  out.reserve(table.draws.size());
  Eigen::VectorXd ds(k);
  for (const auto& dr : table.draws) {
    if (dr.summary.size() != static_cast<std::size_t>(k) ||
        dr.theta.size() != static_cast<std::size_t>(d))
      throw DimensionError("adjust_samples: draw dimensions do not match model");
    for (Eigen::Index j = 0; j < k; ++j)
      ds[j] = dr.summary[static_cast<std::size_t>(j)] - model.S0[static_cast<std::size_t>(j)];
    const Eigen::VectorXd corr = model.B.transpose() * ds;
    ParameterPoint p(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
      p[static_cast<std::size_t>(j)] = dr.theta[static_cast<std::size_t>(j)] - corr[j];
    out.push_back(std::move(p));
  }
  return out;
}

// Minimal-norm limit of the fitted coefficients: zero rows for the slow
// statistics, Gamma2 = G (G'G)^{-1} for the fast block. S0 is left empty.
inline AdjustmentModel oracle_adjustment(const RateProfile& profile) {
  const Eigen::MatrixXd& G = profile.gradient_fast();
  const auto d = G.cols();
  Eigen::MatrixXd gtg = G.transpose() * G;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gtg);
  if (!lu.isInvertible())
    throw NumericError("oracle_adjustment: fast gradient is rank deficient");
  const Eigen::MatrixXd gamma2 = G * lu.inverse();

  const auto k = static_cast<Eigen::Index>(profile.rate_exponents().size());
  AdjustmentModel m;
  m.B = Eigen::MatrixXd::Zero(k, d);
  m.B.bottomRows(k - profile.k0()) = gamma2;
  m.beta0 = Eigen::VectorXd::Zero(d);
  m.ridge_used = 0.0;
  return m;
}

}  // namespace abcr
