#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "abcrates/adjust.hpp"
#include "abcrates/core.hpp"
#include "abcrates/io.hpp"
#include "abcrates/models.hpp"
#include "abcrates/rng.hpp"

using namespace abcr;

namespace {

ReferenceTable table_from(const std::vector<double>& thetas,
                          const std::vector<std::vector<double>>& summaries,
                          const SummaryVector& s0) {
  ReferenceTable t;
  t.observed_summary = s0;
  t.total_simulated = thetas.size();
  t.epsilon = 1e9;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    AcceptedDraw d;
    d.theta = ParameterPoint{thetas[i]};
    d.summary.values = summaries[i];
    d.distance = 0.0;
    t.draws.push_back(d);
  }
  return t;
}

}  // namespace

TEST_CASE("noiseless linear data is recovered exactly") {
  const SummaryVector s0{0.4};
  std::vector<double> thetas;
  std::vector<std::vector<double>> summaries;
  for (int i = 0; i < 25; ++i) {
    const double s = 0.4 + 0.01 * (i - 12);
    summaries.push_back({s});
    thetas.push_back(2.0 + 3.0 * (s - 0.4));
  }
  const auto table = table_from(thetas, summaries, s0);
  const AdjustmentModel m = fit_local_linear(table);
  CHECK(m.beta0[0] == Catch::Approx(2.0).margin(1e-10));
  CHECK(m.B(0, 0) == Catch::Approx(3.0).margin(1e-10));
  CHECK(m.ridge_used == 0.0);

  const auto adjusted = adjust_samples(table, m);
  for (const auto& p : adjusted) CHECK(p[0] == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("constant response gives zero coefficients") {
  const SummaryVector s0{0.0};
  std::vector<double> thetas(30, 0.7);
  std::vector<std::vector<double>> summaries;
  StreamRng rng(12);
  for (int i = 0; i < 30; ++i) summaries.push_back({rng.uniform(-1, 1)});
  const AdjustmentModel m = fit_local_linear(table_from(thetas, summaries, s0));
  CHECK(m.beta0[0] == Catch::Approx(0.7).margin(1e-12));
  CHECK(std::abs(m.B(0, 0)) < 1e-12);
}

TEST_CASE("fit preconditions") {
  const SummaryVector s0{0.0};
  CHECK_THROWS_AS(fit_local_linear(table_from({1.0, 2.0}, {{0.1}, {0.2}}, s0)),
                  InsufficientDataError);
  std::vector<double> thetas{1, 2, 3, 4, 5};
  std::vector<std::vector<double>> same(5, {0.3});
  CHECK_THROWS_AS(fit_local_linear(table_from(thetas, same, s0)), DegenerateError);
}

TEST_CASE("zero adjustment is the identity") {
  const SummaryVector s0{0.1, 0.2};
  std::vector<double> thetas;
  std::vector<std::vector<double>> summaries;
  StreamRng rng(3);
  for (int i = 0; i < 40; ++i) {
    thetas.push_back(rng.uniform());
    summaries.push_back({rng.uniform(), rng.uniform()});
  }
  const auto table = table_from(thetas, summaries, s0);
  AdjustmentModel zero;
  zero.beta0 = Eigen::VectorXd::Zero(1);
  zero.B = Eigen::MatrixXd::Zero(2, 1);
  zero.S0 = s0;
  const auto adjusted = adjust_samples(table, zero);
  for (std::size_t i = 0; i < thetas.size(); ++i) CHECK(adjusted[i][0] == thetas[i]);
}

TEST_CASE("oracle adjustment structure") {
  {
    auto limit = [](const ParameterPoint& t) { return std::vector<double>{t[0], 2 * t[0]}; };
    Eigen::MatrixXd g(1, 1);
    g(0, 0) = 2.0;
    const RateProfile p({0.0, 1.0}, limit, 1, g, 100);
    const AdjustmentModel m = oracle_adjustment(p);
    CHECK(m.B(0, 0) == 0.0);
    CHECK(m.B(1, 0) == Catch::Approx(0.5).epsilon(1e-14));
  }
  {
    const RateProfile p = build_rate_profile(UniformShapeModel(10000, 2));
    const AdjustmentModel m = oracle_adjustment(p);
    REQUIRE(m.B.rows() == 3);
    CHECK(m.B(0, 0) == 0.0);
    CHECK(m.B(1, 0) == 0.0);
    CHECK(m.B(2, 0) == Catch::Approx(1.0).epsilon(1e-14));
  }
  {
    // Orthonormal fast gradient: Gamma2 = G.
    Eigen::MatrixXd G(3, 2);
    G << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
    auto limit = [](const ParameterPoint& t) {
      return std::vector<double>{0.0, t[0], t[1], 0.0};
    };
    const RateProfile p({0.0, 1.0, 1.0, 1.0}, limit, 1, G, 100);
    const AdjustmentModel m = oracle_adjustment(p);
    CHECK((m.B.bottomRows(3) - G).norm() < 1e-14);
  }
}

TEST_CASE("residuals are orthogonal to every centered summary coordinate") {
  StreamRng rng(77);
  const SummaryVector s0{0.0, 0.0, 0.0};
  std::vector<double> thetas;
  std::vector<std::vector<double>> summaries;
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
    summaries.push_back({a, b, c});
    thetas.push_back(0.3 * a - 0.8 * c + 0.1 * rng.uniform(-1, 1));
  }
  const auto table = table_from(thetas, summaries, s0);
  const AdjustmentModel m = fit_local_linear(table);

  Eigen::VectorXd smean = Eigen::VectorXd::Zero(3);
  double tmean = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    for (int j = 0; j < 3; ++j) smean[j] += summaries[i][static_cast<std::size_t>(j)];
    tmean += thetas[i];
  }
  smean /= 500.0;
  tmean /= 500.0;
  Eigen::VectorXd dot = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd snorm = Eigen::VectorXd::Zero(3);
  double rnorm = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    double pred = m.beta0[0];
    for (int j = 0; j < 3; ++j)
      pred += m.B(j, 0) * (summaries[i][static_cast<std::size_t>(j)] - s0[static_cast<std::size_t>(j)]);
    const double r = thetas[i] - pred;
    rnorm += r * r;
    for (int j = 0; j < 3; ++j) {
      const double sc = summaries[i][static_cast<std::size_t>(j)] - smean[j];
      dot[j] += r * sc;
      snorm[j] += sc * sc;
    }
  }
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(dot[j]) < 1e-8 * std::sqrt(rnorm * snorm[j]));
}

TEST_CASE("rescaling a summary coordinate rescales its coefficient inversely") {
  StreamRng rng(9);
  const double c = 40.0;
  std::vector<double> thetas;
  std::vector<std::vector<double>> s_raw, s_scaled;
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    s_raw.push_back({a, b});
    s_scaled.push_back({a * c, b});
    thetas.push_back(0.5 * a + 0.2 * b + 0.01 * rng.uniform(-1, 1));
  }
  const auto t1 = table_from(thetas, s_raw, SummaryVector{0.5, 0.5});
  const auto t2 = table_from(thetas, s_scaled, SummaryVector{0.5 * c, 0.5});
  const AdjustmentModel m1 = fit_local_linear(t1);
  const AdjustmentModel m2 = fit_local_linear(t2);
  CHECK(m2.B(0, 0) == Catch::Approx(m1.B(0, 0) / c).epsilon(1e-10));
  CHECK(m2.B(1, 0) == Catch::Approx(m1.B(1, 0)).epsilon(1e-10));
  const auto a1 = adjust_samples(t1, m1);
  const auto a2 = adjust_samples(t2, m2);
  for (std::size_t i = 0; i < a1.size(); ++i)
    CHECK(a2[i][0] == Catch::Approx(a1[i][0]).margin(1e-10));
}

TEST_CASE("ridge engages only on a degenerate design") {
  StreamRng rng(15);
  std::vector<double> thetas;
  std::vector<std::vector<double>> healthy, collinear;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    healthy.push_back({a, b});
    collinear.push_back({a, 2.0 * a});
    thetas.push_back(a + 0.1 * b);
  }
  const AdjustmentModel mh = fit_local_linear(table_from(thetas, healthy, SummaryVector{0, 0}));
  CHECK(mh.ridge_used == 0.0);
  const AdjustmentModel mc =
      fit_local_linear(table_from(thetas, collinear, SummaryVector{0, 0}));
  CHECK(mc.ridge_used > 0.0);
  CHECK(std::isfinite(mc.B(0, 0)));
  CHECK(std::isfinite(mc.B(1, 0)));
}

TEST_CASE("adjustment model JSON round trip") {
  AdjustmentModel m;
  m.beta0 = Eigen::VectorXd::Zero(1);
  m.beta0[0] = 0.25;
  m.B = Eigen::MatrixXd::Zero(2, 1);
  m.B(0, 0) = -1.5;
  m.B(1, 0) = 0.75;
  m.S0 = SummaryVector{0.1, 0.9};
  m.ridge_used = 1e-12;
  const auto j = adjustment_model_to_json(m);
  const AdjustmentModel back = adjustment_model_from_json(j);
  CHECK(back.beta0[0] == m.beta0[0]);
  CHECK(back.B(0, 0) == m.B(0, 0));
  CHECK(back.B(1, 0) == m.B(1, 0));
  CHECK(back.S0.values == m.S0.values);
  CHECK(back.ridge_used == m.ridge_used);
}

TEST_CASE("adjust_samples validates dimensions") {
  const SummaryVector s0{0.0};
  const auto table = table_from({1.0, 2.0, 3.0}, {{0.1}, {0.2}, {0.3}}, s0);
  AdjustmentModel bad;
  bad.beta0 = Eigen::VectorXd::Zero(1);
  bad.B = Eigen::MatrixXd::Zero(2, 1);
  bad.S0 = SummaryVector{0.0, 0.0};
  CHECK_THROWS_AS(adjust_samples(table, bad), DimensionError);
}
