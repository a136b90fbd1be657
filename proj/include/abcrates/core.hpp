#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "abcrates/errors.hpp"
#include "abcrates/rng.hpp"

namespace abcr {

// theta in R^d.
struct ParameterPoint {
  std::vector<double> values;

  ParameterPoint() = default;
  explicit ParameterPoint(std::size_t d) : values(d, 0.0) {}
  ParameterPoint(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// eta(y) in R^k.
struct SummaryVector {
  std::vector<double> values;

  SummaryVector() = default;
  explicit SummaryVector(std::size_t k) : values(k, 0.0) {}
  SummaryVector(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

inline double euclidean_distance(const SummaryVector& a, const SummaryVector& b) {
  if (a.size() != b.size())
    throw DimensionError("euclidean_distance: length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Behavioral contract for a simulable model: prior, forward simulator and
// summary function. Implementations must be stateless apart from the rng
// passed in, so instances can be shared across workers.
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;

  virtual std::size_t param_dim() const = 0;    // d
  virtual std::size_t summary_dim() const = 0;  // k
  virtual std::size_t data_size() const = 0;    // n

  virtual void prior_sample(StreamRng& rng, ParameterPoint& out) const = 0;
  virtual double prior_density(const ParameterPoint& theta) const = 0;

  virtual std::vector<double> simulate(const ParameterPoint& theta, StreamRng& rng) const = 0;
  virtual SummaryVector summarize(const std::vector<double>& data) const = 0;

  // Draws eta(z) with z ~ P_theta. Must equal summarize(simulate(theta, rng))
  // in distribution; models with tractable summary laws override this to
  // avoid materializing n observations per draw.
  virtual void sample_summary(const ParameterPoint& theta, StreamRng& rng,
                              SummaryVector& out) const {
    out = summarize(simulate(theta, rng));
  }

  // Rejection-step kernel: samples a summary and reports whether it landed
  // within eps of `observed`; fills `out` and `dist` only on acceptance.
  // Overrides may stop generating coordinates as soon as the partial distance
  // exceeds eps, which is unobservable because every draw has its own stream.
  // The coordinate order of the partial sums must match euclidean_distance.
  virtual bool sample_summary_within(const ParameterPoint& theta, const SummaryVector& observed,
                                     double eps, StreamRng& rng, SummaryVector& out,
                                     double& dist) const {
    sample_summary(theta, rng, out);
    const double d = euclidean_distance(out, observed);
    if (d <= eps) {
      dist = d;
      return true;
    }
    return false;
  }

  ParameterPoint prior_sample(StreamRng& rng) const {
    ParameterPoint p(param_dim());
    prior_sample(rng, p);
    return p;
  }

  SummaryVector sample_summary(const ParameterPoint& theta, StreamRng& rng) const {
    SummaryVector s(summary_dim());
    sample_summary(theta, rng, s);
    return s;
  }
};

// Per-statistic convergence profile: v_nj = n^exponent_j, the limit map
// b(theta), the slow/fast split k0 and the fast-block gradient at theta0.
class RateProfile {
 public:
  RateProfile(std::vector<double> rate_exponents,
              std::function<std::vector<double>(const ParameterPoint&)> limit_map, int k0,
              Eigen::MatrixXd gradient_fast, std::size_t n)
      : rate_exponents_(std::move(rate_exponents)),
        limit_map_(std::move(limit_map)),
        k0_(k0),
        gradient_fast_(std::move(gradient_fast)),
        n_(n) {
    const int k = static_cast<int>(rate_exponents_.size());
    if (k < 1) throw DimensionError("RateProfile: needs at least one statistic");
    for (int j = 1; j < k; ++j) {
      if (rate_exponents_[j] < rate_exponents_[j - 1])
        throw ConfigError("RateProfile: rates must be nondecreasing in j");
    }
    if (k0_ < 0 || k0_ >= k) throw ConfigError("RateProfile: k0 must satisfy 0 <= k0 < k");
    if (gradient_fast_.rows() != k - k0_)
      throw DimensionError("RateProfile: gradient_fast must have k - k0 rows");
    if (gradient_fast_.cols() < 1) throw DimensionError("RateProfile: gradient_fast needs d >= 1");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gradient_fast_);
    if (qr.rank() < gradient_fast_.cols())
      throw NumericError("RateProfile: gradient_fast is not of full column rank");
  }

  int k0() const { return k0_; }
  std::size_t n() const { return n_; }
  const std::vector<double>& rate_exponents() const { return rate_exponents_; }
  const Eigen::MatrixXd& gradient_fast() const { return gradient_fast_; }

  // v_nj evaluated at this profile's n.
  double rate(int j) const { return std::pow(static_cast<double>(n_), rate_exponents_[j]); }
  std::vector<double> rates() const {
    std::vector<double> r(rate_exponents_.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = rate(static_cast<int>(j));
    return r;
  }

  std::vector<double> limit(const ParameterPoint& theta) const { return limit_map_(theta); }

 private:
  std::vector<double> rate_exponents_;
  std::function<std::vector<double>(const ParameterPoint&)> limit_map_;
  int k0_;
  Eigen::MatrixXd gradient_fast_;
  std::size_t n_;
};

struct AcceptedDraw {
  ParameterPoint theta;
  SummaryVector summary;
  double distance = 0.0;
};

// Output of Algorithm 1: accepted draws plus run metadata. Rejected draws are
// discarded immediately; only summaries of accepted draws are kept.
struct ReferenceTable {
  std::vector<AcceptedDraw> draws;
  std::uint64_t total_simulated = 0;  // M
  double epsilon = 0.0;
  SummaryVector observed_summary;
  std::uint64_t seed = 0;
  bool zero_acceptance_warning = false;
  bool degenerate_pilot_warning = false;
};

}  // namespace abcr
