#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/models.hpp"

namespace abcr {

namespace detail {

// integral over {y: y'Ay <= tau2} of ((tau2 - y'Ay)/eps2)^(R/2) dy, by
// recursive slicing: the first coordinate ranges over +-sqrt(tau2/s) with s
// the Schur complement, and each slice is again an ellipsoid integral.
inline double ellipsoid_integral(const Eigen::MatrixXd& A, double tau2, double eps2, double R,
                                 double tol) {
  const auto d = A.rows();
  if (tau2 <= 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  if (d == 1) {
    const double a11 = A(0, 0);
    const double r = std::sqrt(tau2 / a11);
    auto f = [&](double t) {
      const double rem = tau2 - a11 * t * t;
      return rem > 0.0 ? std::pow(rem / eps2, 0.5 * R) : 0.0;
    };
    const double val = integrator.integrate(f, -r, r, tol, &err);
    if (!(err <= 10.0 * tol * std::max(1.0, std::abs(val))))
      throw NumericError("ellipsoid_integral: 1-d quadrature did not converge (err=" +
                         std::to_string(err) + ")");
    return val;
  }
  const Eigen::MatrixXd A22 = A.bottomRightCorner(d - 1, d - 1);
  const Eigen::VectorXd a21 = A.bottomLeftCorner(d - 1, 1);
  const double schur = A(0, 0) - a21.dot(A22.ldlt().solve(a21));
  if (schur <= 0.0) throw NumericError("ellipsoid_integral: matrix not positive definite");
  const double r = std::sqrt(tau2 / schur);
  auto f = [&](double t) {
    return ellipsoid_integral(A22, tau2 - schur * t * t, eps2, R, tol * 0.1);
  };
  const double val = integrator.integrate(f, -r, r, tol, &err);
  if (!(err <= 10.0 * tol * std::max(1.0, std::abs(val))))
    throw NumericError("ellipsoid_integral: quadrature did not converge (err=" +
                       std::to_string(err) + ")");
  return val;
}

}  // namespace detail

// Closed-form 1-d normalizer: integral over |t - theta0| <= eps/a of
// (1 - a^2 (t-theta0)^2 / eps^2)^(R/2) dt = (eps/a) * Beta(1/2, R/2 + 1).
inline double normalizer_closed_form_1d(double eps, double fast_gradient_norm, double R) {
  if (!(eps > 0.0)) throw ConfigError("normalizer_closed_form_1d: eps must be positive");
  if (!(fast_gradient_norm > 0.0))
    throw ConfigError("normalizer_closed_form_1d: gradient norm must be positive");
  if (R < 0.0) throw ConfigError("normalizer_closed_form_1d: R must be nonnegative");
  return eps / fast_gradient_norm * std::beta(0.5, 0.5 * R + 1.0);
}

// Numerical route for the same integral, any d: adaptive quadrature over the
// support ellipsoid {theta: ||G (theta - theta0)|| <= eps}.
inline double normalizer_by_quadrature(const Eigen::MatrixXd& gradient_fast, double eps, double R,
                                       double tol = 1e-10) {
  const Eigen::MatrixXd A = gradient_fast.transpose() * gradient_fast;
  return detail::ellipsoid_integral(A, eps * eps, eps * eps, R, tol);
}

// The closed-form asymptotic ABC posterior: density proportional to
// (1 - ||G (theta - theta0)||^2 / eps^2)^(R/2) on its support ellipsoid.
// For R = 0 this is the uniform distribution on the ellipsoid.
class TheoreticalPosterior {
 public:
  TheoreticalPosterior(ParameterPoint theta0, double epsilon, double R,
                       Eigen::MatrixXd gradient_fast)
      : theta0_(std::move(theta0)),
        epsilon_(epsilon),
        R_(R),
        gradient_fast_(std::move(gradient_fast)) {
    const auto d = static_cast<Eigen::Index>(theta0_.size());
    if (d < 1) throw DimensionError("TheoreticalPosterior: parameter dimension must be >= 1");
    if (!(epsilon_ > 0.0)) throw ConfigError("TheoreticalPosterior: epsilon must be positive");
    if (R_ < 0.0) throw ConfigError("TheoreticalPosterior: R must be nonnegative");
    if (gradient_fast_.cols() != d)
      throw DimensionError("TheoreticalPosterior: gradient_fast must have d columns");
    if (gradient_fast_.rows() < d)
      throw DimensionError(
          "TheoreticalPosterior: needs at least d fast statistics (k - k0 >= d)");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gradient_fast_);
    if (qr.rank() < d)
      throw NumericError("TheoreticalPosterior: gradient_fast is not of full column rank");
    if (d == 1) {
      normalizer_ = normalizer_closed_form_1d(epsilon_, gradient_fast_.col(0).norm(), R_);
    } else {
      normalizer_ = normalizer_by_quadrature(gradient_fast_, epsilon_, R_, 1e-9);
    }
    if (!(normalizer_ > 0.0)) throw NumericError("TheoreticalPosterior: normalizer is not positive");
  }

  double density(const ParameterPoint& theta) const {
    if (theta.size() != theta0_.size())
      throw DimensionError("TheoreticalPosterior::density: dimension mismatch");
    Eigen::VectorXd diff(theta0_.size());
    for (std::size_t i = 0; i < theta0_.size(); ++i) diff[static_cast<Eigen::Index>(i)] = theta[i] - theta0_[i];
    const double w = (gradient_fast_ * diff).squaredNorm() / (epsilon_ * epsilon_);
    if (w > 1.0) return 0.0;
    return std::pow(1.0 - w, 0.5 * R_) / normalizer_;
  }

  // 1-d convenience.
  double density(double theta) const { return density(ParameterPoint{theta}); }

  const ParameterPoint& theta0() const { return theta0_; }
  double epsilon() const { return epsilon_; }
  double exponent() const { return R_; }
  const Eigen::MatrixXd& gradient_fast() const { return gradient_fast_; }
  double normalizer() const { return normalizer_; }

  // Half-width of the support along coordinate axis j.
  double support_halfwidth(int j = 0) const {
    const Eigen::MatrixXd A = gradient_fast_.transpose() * gradient_fast_;
    return epsilon_ * std::sqrt(A.inverse()(j, j));
  }

 private:
  ParameterPoint theta0_;
  double epsilon_;
  double R_;
  Eigen::MatrixXd gradient_fast_;
  double normalizer_;
};

// Predicted exponent of n in the acceptance rate alpha_n when eps_n = C/sqrt(n)
// and all slow statistics have unit rates: alpha_n ~ eps_n^(k0+d), i.e.
// n^(-(k0+d)/2). General slow rates are out of scope.
inline double predict_acceptance_exponent(const RateProfile& profile, int d) {
  if (d < 1) throw ConfigError("predict_acceptance_exponent: d must be >= 1");
  for (int j = 0; j < profile.k0(); ++j) {
    if (profile.rate_exponents()[static_cast<std::size_t>(j)] != 0.0)
      throw UnsupportedRegimeError(
          "predict_acceptance_exponent: requires unit slow rates (v_ni = 1)");
  }
  return -0.5 * static_cast<double>(profile.k0() + d);
}

// Theorem-2 posterior specialized to the shape model: center theta0,
// eps = C/sqrt(n), exponent R = k0, unit fast gradient.
inline TheoreticalPosterior shape_posterior_for(const UniformShapeModel& model, double C) {
  if (!(C > 0.0)) throw ConfigError("shape_posterior_for: C must be positive");
  const double eps = C / std::sqrt(static_cast<double>(model.data_size()));
  Eigen::MatrixXd grad(1, 1);
  grad(0, 0) = 1.0;
  return TheoreticalPosterior(ParameterPoint{model.theta0()}, eps,
                              static_cast<double>(model.k0()), grad);
}

}  // namespace abcr
