#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"

namespace abcr {

namespace detail {

// Exact joint draw of (min, max) of m iid U(0,1) via order statistics:
// max ~ V^(1/m); given max = g the rest are iid U(0, g), so
// min = g * (1 - W^(1/(m-1))). One observation is its own extremum pair.
inline void sample_min_max_uniform(std::size_t m, StreamRng& rng, double& mn, double& mx) {
  if (m == 1) {
    mn = mx = rng.uniform();
    return;
  }
  const double g = std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
  const double h = g * (1.0 - std::pow(rng.uniform(), 1.0 / static_cast<double>(m - 1)));
  mn = h;
  mx = g;
}

inline std::size_t integer_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace detail

// First k0 entries are the raw leading observations, last entry the midrange
// of the remaining ones.
inline SummaryVector summarize_uniform_shape(const std::vector<double>& data, int k0) {
  if (k0 < 0) throw ConfigError("summarize_uniform_shape: k0 must be >= 0");
  if (data.size() <= static_cast<std::size_t>(k0))
    throw DimensionError("summarize_uniform_shape: dataset length must exceed k0");
  SummaryVector s(static_cast<std::size_t>(k0) + 1);
  for (int i = 0; i < k0; ++i) s[i] = data[i];
  double mn = data[k0], mx = data[k0];
  for (std::size_t i = k0 + 1; i < data.size(); ++i) {
    mn = std::min(mn, data[i]);
    mx = std::max(mx, data[i]);
  }
  s[k0] = 0.5 * (mn + mx);
  return s;
}

// (mean of the first sqrt(n) observations, minimum of all n).
inline SummaryVector summarize_uniform_risk(const std::vector<double>& data) {
  const std::size_t n = data.size();
  if (n < 4) throw DimensionError("summarize_uniform_risk: dataset too short");
  const std::size_t r = detail::integer_sqrt(n);
  if (r * r != n)
    throw ConfigError("summarize_uniform_risk: dataset length must be a perfect square");
  double sum = 0.0;
  for (std::size_t i = 0; i < r; ++i) sum += data[i];
  double mn = data[0];
  for (std::size_t i = 1; i < n; ++i) mn = std::min(mn, data[i]);
  return SummaryVector{sum / static_cast<double>(r), mn};
}

// Location model of the shape study: y_i ~ U(theta - 1/2, theta + 1/2) with a
// U(0,1) prior, summaries (y_1, ..., y_k0, midrange of the rest).
class UniformShapeModel final : public GenerativeModel {
 public:
  UniformShapeModel(std::size_t n, int k0, double theta0 = 0.5)
      : n_(n), k0_(k0), theta0_(theta0) {
    if (k0 < 0) throw ConfigError("UniformShapeModel: k0 must be >= 0");
    if (n <= static_cast<std::size_t>(k0))
      throw ConfigError("UniformShapeModel: need n > k0 observations");
    if (!(theta0 > 0.0 && theta0 < 1.0))
      throw ConfigError("UniformShapeModel: theta0 must lie in (0,1)");
  }

  using GenerativeModel::prior_sample;
  using GenerativeModel::sample_summary;

  std::size_t param_dim() const override { return 1; }
  std::size_t summary_dim() const override { return static_cast<std::size_t>(k0_) + 1; }
  std::size_t data_size() const override { return n_; }
  int k0() const { return k0_; }
  double theta0() const { return theta0_; }

  void prior_sample(StreamRng& rng, ParameterPoint& out) const override {
    out.values[0] = rng.uniform();
  }

  double prior_density(const ParameterPoint& theta) const override {
    const double t = theta[0];
    return (t > 0.0 && t < 1.0) ? 1.0 : 0.0;
  }

  std::vector<double> simulate(const ParameterPoint& theta, StreamRng& rng) const override {
    std::vector<double> data(n_);
    const double lo = theta[0] - 0.5;
    for (auto& x : data) x = lo + rng.uniform();
    return data;
  }

  SummaryVector summarize(const std::vector<double>& data) const override {
    return summarize_uniform_shape(data, k0_);
  }

  void sample_summary(const ParameterPoint& theta, StreamRng& rng,
                      SummaryVector& out) const override {
    const double lo = theta[0] - 0.5;
    for (int i = 0; i < k0_; ++i) out[i] = lo + rng.uniform();
    double mn, mx;
    detail::sample_min_max_uniform(n_ - static_cast<std::size_t>(k0_), rng, mn, mx);
    out[k0_] = lo + 0.5 * (mn + mx);
  }

  bool sample_summary_within(const ParameterPoint& theta, const SummaryVector& observed,
                             double eps, StreamRng& rng, SummaryVector& out,
                             double& dist) const override {
    const double lo = theta[0] - 0.5;
    const double eps2 = eps * eps;
    double d2 = 0.0;
    for (int i = 0; i < k0_; ++i) {
      const double z = lo + rng.uniform();
      const double d = z - observed[i];
      d2 += d * d;
      if (d2 > eps2) return false;
      out[i] = z;
    }
    double mn, mx;
    detail::sample_min_max_uniform(n_ - static_cast<std::size_t>(k0_), rng, mn, mx);
    const double mid = lo + 0.5 * (mn + mx);
    const double d = mid - observed[k0_];
    d2 += d * d;
    if (d2 > eps2) return false;
    out[k0_] = mid;
    dist = std::sqrt(d2);
    return true;
  }

  RateProfile rate_profile() const {
    std::vector<double> expo(static_cast<std::size_t>(k0_), 0.0);
    expo.push_back(1.0);
    const int k = k0_ + 1;
    auto limit = [k](const ParameterPoint& th) {
      return std::vector<double>(static_cast<std::size_t>(k), th[0]);
    };
    Eigen::MatrixXd grad(1, 1);
    grad(0, 0) = 1.0;
    return RateProfile(std::move(expo), limit, k0_, grad, n_);
  }

 private:
  std::size_t n_;
  int k0_;
  double theta0_;
};

// Location model of the risk study: X_i ~ U(theta, theta + 1), summaries
// S1 = mean of the first sqrt(n) observations and S2 = min of all n.
// n is restricted to perfect squares so sqrt(n) is integral. The prior is
// U(theta0 - 1/2, theta0 + 1/2), wide relative to every tolerance used.
class UniformRiskModel final : public GenerativeModel {
 public:
  UniformRiskModel(std::size_t n, double theta0 = 0.5) : n_(n), theta0_(theta0) {
    if (n < 4) throw ConfigError("UniformRiskModel: need n >= 4");
    root_ = detail::integer_sqrt(n);
    if (root_ * root_ != n) throw ConfigError("UniformRiskModel: n must be a perfect square");
  }

  using GenerativeModel::prior_sample;
  using GenerativeModel::sample_summary;

  std::size_t param_dim() const override { return 1; }
  std::size_t summary_dim() const override { return 2; }
  std::size_t data_size() const override { return n_; }
  double theta0() const { return theta0_; }

  void prior_sample(StreamRng& rng, ParameterPoint& out) const override {
    out.values[0] = rng.uniform(theta0_ - 0.5, theta0_ + 0.5);
  }

  double prior_density(const ParameterPoint& theta) const override {
    const double t = theta[0];
    return (t > theta0_ - 0.5 && t < theta0_ + 0.5) ? 1.0 : 0.0;
  }

  std::vector<double> simulate(const ParameterPoint& theta, StreamRng& rng) const override {
    std::vector<double> data(n_);
    for (auto& x : data) x = theta[0] + rng.uniform();
    return data;
  }

  SummaryVector summarize(const std::vector<double>& data) const override {
    return summarize_uniform_risk(data);
  }

  void sample_summary(const ParameterPoint& theta, StreamRng& rng,
                      SummaryVector& out) const override {
    double sum = 0.0, mn = 1.0;
    for (std::size_t i = 0; i < root_; ++i) {
      const double u = rng.uniform();
      sum += u;
      mn = std::min(mn, u);
    }
    // min over the remaining n - sqrt(n) observations, drawn marginally.
    const double rest = 1.0 - std::pow(rng.uniform(), 1.0 / static_cast<double>(n_ - root_));
    out[0] = theta[0] + sum / static_cast<double>(root_);
    out[1] = theta[0] + std::min(mn, rest);
  }

  bool sample_summary_within(const ParameterPoint& theta, const SummaryVector& observed,
                             double eps, StreamRng& rng, SummaryVector& out,
                             double& dist) const override {
    const double eps2 = eps * eps;
    double sum = 0.0, mn = 1.0;
    for (std::size_t i = 0; i < root_; ++i) {
      const double u = rng.uniform();
      sum += u;
      mn = std::min(mn, u);
    }
    const double s1 = theta[0] + sum / static_cast<double>(root_);
    double d = s1 - observed[0];
    double d2 = d * d;
    if (d2 > eps2) return false;
    const double rest = 1.0 - std::pow(rng.uniform(), 1.0 / static_cast<double>(n_ - root_));
    const double s2 = theta[0] + std::min(mn, rest);
    d = s2 - observed[1];
    d2 += d * d;
    if (d2 > eps2) return false;
    out[0] = s1;
    out[1] = s2;
    dist = std::sqrt(d2);
    return true;
  }

  RateProfile rate_profile() const {
    auto limit = [](const ParameterPoint& th) {
      return std::vector<double>{th[0] + 0.5, th[0]};
    };
    Eigen::MatrixXd grad(1, 1);
    grad(0, 0) = 1.0;
    return RateProfile({0.25, 1.0}, limit, 1, grad, n_);
  }

 private:
  std::size_t n_;
  std::size_t root_;
  double theta0_;
};

// Toy example with k1 non-converging statistics: summaries are the first k1
// raw observations, the sample mean and the sample max of U(theta-1/2,
// theta+1/2) data. Scenario 1 (1/n << eps << 1/sqrt(n)) counts the mean among
// the slow statistics; scenario 2 (1/sqrt(n) << eps << 1) does not.
class Example1Model final : public GenerativeModel {
 public:
  Example1Model(std::size_t n, int k1, int scenario) : n_(n), k1_(k1), scenario_(scenario) {
    if (k1 < 0) throw ConfigError("Example1Model: k1 must be >= 0");
    if (scenario != 1 && scenario != 2) throw ConfigError("Example1Model: scenario must be 1 or 2");
    if (n <= static_cast<std::size_t>(k1)) throw ConfigError("Example1Model: need n > k1");
  }

  std::size_t param_dim() const override { return 1; }
  std::size_t summary_dim() const override { return static_cast<std::size_t>(k1_) + 2; }
  std::size_t data_size() const override { return n_; }
  int k1() const { return k1_; }
  int scenario() const { return scenario_; }

  void prior_sample(StreamRng& rng, ParameterPoint& out) const override {
    out.values[0] = rng.uniform();
  }

  double prior_density(const ParameterPoint& theta) const override {
    const double t = theta[0];
    return (t > 0.0 && t < 1.0) ? 1.0 : 0.0;
  }

  std::vector<double> simulate(const ParameterPoint& theta, StreamRng& rng) const override {
    std::vector<double> data(n_);
    const double lo = theta[0] - 0.5;
    for (auto& x : data) x = lo + rng.uniform();
    return data;
  }

  SummaryVector summarize(const std::vector<double>& data) const override {
    if (data.size() <= static_cast<std::size_t>(k1_))
      throw DimensionError("Example1Model::summarize: dataset too short");
    SummaryVector s(static_cast<std::size_t>(k1_) + 2);
    for (int i = 0; i < k1_; ++i) s[i] = data[i];
    double sum = 0.0, mx = data[0];
    for (const double x : data) {
      sum += x;
      mx = std::max(mx, x);
    }
    s[k1_] = sum / static_cast<double>(data.size());
    s[k1_ + 1] = mx;
    return s;
  }

  RateProfile rate_profile() const {
    std::vector<double> expo(static_cast<std::size_t>(k1_), 0.0);
    expo.push_back(0.5);
    expo.push_back(1.0);
    const int k1 = k1_;
    auto limit = [k1](const ParameterPoint& th) {
      std::vector<double> b(static_cast<std::size_t>(k1), 0.0);
      b.push_back(th[0]);
      b.push_back(0.5 + th[0]);
      return b;
    };
    const int k0 = (scenario_ == 1) ? k1_ + 1 : k1_;
    const int fast = k1_ + 2 - k0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Ones(fast, 1);
    return RateProfile(std::move(expo), limit, k0, grad, n_);
  }

 private:
  std::size_t n_;
  int k1_;
  int scenario_;
};

inline RateProfile build_rate_profile(const UniformShapeModel& m) { return m.rate_profile(); }
inline RateProfile build_rate_profile(const UniformRiskModel& m) { return m.rate_profile(); }
inline RateProfile build_rate_profile(const Example1Model& m) { return m.rate_profile(); }

}  // namespace abcr
