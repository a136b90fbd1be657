#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "abcrates/models.hpp"
#include "abcrates/theory.hpp"

using namespace abcr;

namespace {

Eigen::MatrixXd scalar_gradient(double a) {
  Eigen::MatrixXd g(1, 1);
  g(0, 0) = a;
  return g;
}

RateProfile profile_with(int k0, int d) {
  std::vector<double> expo(static_cast<std::size_t>(k0), 0.0);
  for (int j = 0; j < d; ++j) expo.push_back(1.0);
  const int k = k0 + d;
  auto limit = [k](const ParameterPoint& t) {
    return std::vector<double>(static_cast<std::size_t>(k), t[0]);
  };
  return RateProfile(expo, limit, k0, Eigen::MatrixXd::Identity(d, d), 1000);
}

}  // namespace

TEST_CASE("R = 0 gives the uniform density a/(2 eps) on the ellipsoid") {
  const double eps = 0.1;
  TheoreticalPosterior tp(ParameterPoint{0.5}, eps, 0.0, scalar_gradient(1.0));
  CHECK(tp.normalizer() == Catch::Approx(0.2).epsilon(1e-12));
  CHECK(tp.density(0.5) == Catch::Approx(5.0).epsilon(1e-12));
  CHECK(tp.density(0.5 + 0.99 * eps) == Catch::Approx(5.0).epsilon(1e-12));
  CHECK(tp.density(0.5 + 1.01 * eps) == 0.0);

  TheoreticalPosterior tp2(ParameterPoint{0.0}, eps, 0.0, scalar_gradient(2.0));
  CHECK(tp2.density(0.0) == Catch::Approx(10.0).epsilon(1e-12));
  CHECK(tp2.support_halfwidth() == Catch::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("R = 2 normalizer is (4/3) eps and the center density 3/(4 eps)") {
  const double eps = 0.03;
  TheoreticalPosterior tp(ParameterPoint{0.5}, eps, 2.0, scalar_gradient(1.0));
  CHECK(tp.normalizer() == Catch::Approx(4.0 / 3.0 * eps).epsilon(1e-12));
  CHECK(tp.density(0.5) == Catch::Approx(3.0 / (4.0 * eps)).epsilon(1e-12));
  CHECK(tp.density(0.5 + eps) == 0.0);  // boundary w = 1, R > 0
}

TEST_CASE("normalize closed forms") {
  CHECK(normalizer_closed_form_1d(0.1, 1.0, 0.0) == Catch::Approx(0.2).epsilon(1e-13));
  // Hand integral: int_{-1}^{1} (1 - t^2) dt = 4/3.
  CHECK(normalizer_closed_form_1d(1.0, 1.0, 2.0) == Catch::Approx(4.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("1-d quadrature matches the Beta closed form to 1e-10") {
  for (const double R : {0.0, 1.0, 2.0, 5.0}) {
    for (const double a : {1.0, 2.5}) {
      for (const double eps : {0.01, 1.0}) {
        const double closed = normalizer_closed_form_1d(eps, a, R);
        const double quad = normalizer_by_quadrature(scalar_gradient(a), eps, R, 1e-12);
        CHECK(std::abs(quad - closed) <= 1e-10 * closed);
      }
    }
  }
}

TEST_CASE("d = 2 quadrature matches the analytic ellipsoid integral to 1e-6") {
  // Oracle: with A = G'G, the integral is
  //   eps^2 det(A)^(-1/2) * pi * Gamma(R/2+1)/Gamma(R/2+2) = eps^2 det^(-1/2) pi/(R/2+1).
  Eigen::MatrixXd G(3, 2);
  G << 1.0, 0.0, 0.0, 2.0, 1.0, 1.0;
  const double det = (G.transpose() * G).determinant();
  for (const double R : {0.0, 1.0, 2.0, 5.0}) {
    const double eps = 0.7;
    const double analytic = eps * eps / std::sqrt(det) * M_PI / (0.5 * R + 1.0);
    const double quad = normalizer_by_quadrature(G, eps, R, 1e-9);
    CHECK(std::abs(quad - analytic) <= 1e-6 * analytic);
  }
}

TEST_CASE("densities integrate to one") {
  // d = 1 against a plain Riemann sum, d = 2 by the cached normalizer against
  // an independent quadrature tolerance.
  TheoreticalPosterior tp(ParameterPoint{0.0}, 0.5, 1.0, scalar_gradient(1.0));
  const int N = 200000;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    const double t = -0.5 + (i + 0.5) / N;
    sum += tp.density(t) / N;
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-6));

  Eigen::MatrixXd G2 = Eigen::MatrixXd::Identity(2, 2);
  for (const double R : {0.0, 1.0, 2.0, 5.0}) {
    TheoreticalPosterior tp2(ParameterPoint{0.0, 0.0}, 0.3, R, G2);
    const double quad = normalizer_by_quadrature(G2, 0.3, R, 1e-10);
    CHECK(tp2.normalizer() == Catch::Approx(quad).margin(1e-6 * quad));
  }
}

TEST_CASE("density is maximal at theta0 and radially nonincreasing") {
  TheoreticalPosterior tp(ParameterPoint{0.2}, 0.4, 3.0, scalar_gradient(1.5));
  double prev = tp.density(0.2);
  for (int i = 1; i <= 40; ++i) {
    const double cur = tp.density(0.2 + i * 0.01);
    CHECK(cur <= prev + 1e-15);
    CHECK(cur >= 0.0);
    prev = cur;
  }
}

TEST_CASE("theoretical posterior validates its inputs") {
  CHECK_THROWS_AS(TheoreticalPosterior(ParameterPoint{0.0}, 0.0, 1.0, scalar_gradient(1.0)),
                  ConfigError);
  CHECK_THROWS_AS(TheoreticalPosterior(ParameterPoint{0.0}, 0.1, -1.0, scalar_gradient(1.0)),
                  ConfigError);
  // Fewer fast statistics than parameters (k - k0 < d) is rejected.
  Eigen::MatrixXd wide(1, 2);
  wide << 1.0, 0.0;
  CHECK_THROWS_AS(TheoreticalPosterior(ParameterPoint{0.0, 0.0}, 0.1, 1.0, wide),
                  DimensionError);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(TheoreticalPosterior(ParameterPoint{0.0, 0.0}, 0.1, 1.0, singular),
                  NumericError);
}

TEST_CASE("predicted acceptance exponents") {
  CHECK(predict_acceptance_exponent(profile_with(2, 1), 1) == -1.5);
  CHECK(predict_acceptance_exponent(profile_with(0, 1), 1) == -0.5);
  CHECK(predict_acceptance_exponent(profile_with(3, 2), 2) == -2.5);
  // Non-unit slow rates (the risk model) are outside the formula's regime.
  CHECK_THROWS_AS(predict_acceptance_exponent(build_rate_profile(UniformRiskModel(10000)), 1),
                  UnsupportedRegimeError);
}

TEST_CASE("shape_posterior_for wires the schedule eps = C/sqrt(n)") {
  UniformShapeModel model(10000, 2, 0.5);
  const TheoreticalPosterior tp = shape_posterior_for(model, 1.0);
  CHECK(tp.epsilon() == Catch::Approx(0.01).epsilon(1e-14));
  CHECK(tp.exponent() == 2.0);
  CHECK(tp.theta0()[0] == 0.5);

  UniformShapeModel flat(10000, 0, 0.5);
  const TheoreticalPosterior uni = shape_posterior_for(flat, 1.0);
  CHECK(uni.density(0.5) == Catch::Approx(uni.density(0.5 + 0.009)).epsilon(1e-12));

  UniformShapeModel bigger(40000, 2, 0.5);
  CHECK(shape_posterior_for(bigger, 1.0).epsilon() ==
        Catch::Approx(tp.epsilon() / 2.0).epsilon(1e-14));
}
