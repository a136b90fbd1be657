#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/theory.hpp"

namespace abcr {

// Normalized histogram density: values over equal-width bins centered at grid.
struct DensityEstimate {
  std::vector<double> grid;    // bin centers, ascending
  std::vector<double> values;  // nonnegative, sum * bin_width == 1
  double bin_width = 0.0;
};

struct RiskPoint {
  double epsilon = 0.0;
  double risk = 0.0;
  std::uint64_t n_samples = 0;
};

// (epsilon, risk) measurements for one estimator; epsilons strictly decreasing.
struct RiskCurve {
  std::vector<RiskPoint> points;
  std::string tag;  // "vanilla" | "adjusted"
};

// Continuous two-piece linear fit in log10-log10 space. slope_left applies
// below the breakpoint (in log10 epsilon), slope_right above; intercept is
// the fitted value at the breakpoint.
struct SegmentedFit {
  double slope_left = 0.0;
  double slope_right = 0.0;
  double breakpoint = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline DensityEstimate estimate_density(const std::vector<double>& samples, int bins) {
  if (samples.size() < 100)
    throw InsufficientDataError("estimate_density: need at least 100 samples");
  if (bins < 10) throw ConfigError("estimate_density: need at least 10 bins");
  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn_it, hi = *mx_it;
  if (!(hi > lo)) throw DegenerateError("estimate_density: all samples identical");

  const double width = (hi - lo) / bins;
  DensityEstimate est;
  est.bin_width = width;
  est.grid.resize(static_cast<std::size_t>(bins));
  est.values.assign(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) est.grid[static_cast<std::size_t>(b)] = lo + (b + 0.5) * width;
  for (const double x : samples) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
    est.values[b] += 1.0;
  }
  const double norm = static_cast<double>(samples.size()) * width;
  for (auto& v : est.values) v /= norm;
  return est;
}

// L1 distance between a histogram and a closed-form density, evaluated at bin
// centers, plus whatever density mass the histogram's span does not cover (so
// distributions with disjoint supports measure 2).
inline double l1_discrepancy(const DensityEstimate& a, const TheoreticalPosterior& tp) {
  double l1 = 0.0, covered = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double f = tp.density(a.grid[i]);
    l1 += std::abs(a.values[i] - f) * a.bin_width;
    covered += f * a.bin_width;
  }
  return l1 + std::max(0.0, 1.0 - covered);
}

namespace detail {

// Piecewise-linear interpolation through (grid, values); zero outside.
inline double interp_density(const DensityEstimate& d, double x) {
  if (d.grid.empty() || x < d.grid.front() || x > d.grid.back()) return 0.0;
  const auto it = std::lower_bound(d.grid.begin(), d.grid.end(), x);
  const auto j = static_cast<std::size_t>(it - d.grid.begin());
  if (j == 0) return d.values.front();
  const double t = (x - d.grid[j - 1]) / (d.grid[j] - d.grid[j - 1]);
  return d.values[j - 1] + t * (d.values[j] - d.values[j - 1]);
}

}  // namespace detail

// Same metric between two estimates; b is interpolated at a's bin centers.
inline double l1_discrepancy(const DensityEstimate& a, const DensityEstimate& b) {
  double l1 = 0.0, covered = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double f = detail::interp_density(b, a.grid[i]);
    l1 += std::abs(a.values[i] - f) * a.bin_width;
    covered += f * a.bin_width;
  }
  return l1 + std::max(0.0, 1.0 - covered);
}

inline double posterior_risk(const std::vector<ParameterPoint>& samples,
                             const ParameterPoint& theta0) {
  if (samples.empty()) throw InsufficientDataError("posterior_risk: no samples");
  double s = 0.0;
  for (const auto& p : samples) {
    if (p.size() != theta0.size()) throw DimensionError("posterior_risk: dimension mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double d = p[j] - theta0[j];
      s += d * d;
    }
  }
  return std::sqrt(s / static_cast<double>(samples.size()));
}

inline LogLogFit loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InsufficientDataError("loglog_slope: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw DomainError("loglog_slope: all coordinates must be positive");
    const double lx = std::log10(x), ly = std::log10(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DegenerateError("loglog_slope: all x values identical");
  LogLogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

namespace detail {

struct HingeFit {
  double v0 = 0.0, bl = 0.0, br = 0.0, sse = 0.0;
};

// y ~ v0 + bl*min(x-c,0) + br*max(x-c,0), joint least squares.
inline HingeFit fit_hinge(const std::vector<double>& x, const std::vector<double>& y, double c) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - c;
    X(i, 0) = 1.0;
    X(i, 1) = std::min(dx, 0.0);
    X(i, 2) = std::max(dx, 0.0);
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
  HingeFit f;
  f.v0 = beta[0];
  f.bl = beta[1];
  f.br = beta[2];
  f.sse = (X * beta - Y).squaredNorm();
  return f;
}

}  // namespace detail

// Continuous two-piece fit in log-log space. The breakpoint is found by
// exhaustive search over midpoints between consecutive x values followed by a
// 50-point refinement inside the winning interval; both segments are fit
// jointly under the continuity constraint.
inline SegmentedFit segmented_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 6) throw InsufficientDataError("segmented_slope: need at least 6 points");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw DomainError("segmented_slope: all coordinates must be positive");
    pts.emplace_back(std::log10(x), std::log10(y));
  }
  std::sort(pts.begin(), pts.end());
  const std::size_t n = pts.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pts[i].first;
    y[i] = pts[i].second;
  }

  // Candidate midpoints keeping at least two points on each side.
  double best_c = 0.0, best_sse = 0.0;
  std::size_t best_i = 0;
  bool first = true;
  for (std::size_t i = 1; i + 2 < n; ++i) {
    const double c = 0.5 * (x[i] + x[i + 1]);
    const auto f = detail::fit_hinge(x, y, c);
    if (first || f.sse < best_sse) {
      first = false;
      best_sse = f.sse;
      best_c = c;
      best_i = i;
    }
  }
  const double lo = x[best_i], hi = x[best_i + 1];
  for (int t = 1; t <= 50; ++t) {
    const double c = lo + (hi - lo) * t / 51.0;
    const auto f = detail::fit_hinge(x, y, c);
    if (f.sse < best_sse) {
      best_sse = f.sse;
      best_c = c;
    }
  }

  const auto f = detail::fit_hinge(x, y, best_c);
  SegmentedFit fit;
  fit.slope_left = f.bl;
  fit.slope_right = f.br;
  fit.breakpoint = best_c;
  fit.intercept = f.v0;
  fit.sse = f.sse;
  return fit;
}

// Independent grid oracle for the pseudo-posterior: estimates the acceptance
// probability at each grid theta by plain Monte Carlo over full simulated
// datasets (deliberately not using any model summary shortcut), then returns
// the prior-weighted normalized grid density.
inline DensityEstimate brute_force_posterior(const GenerativeModel& model,
                                             const SummaryVector& observed, double eps,
                                             const std::vector<double>& grid, std::uint64_t reps,
                                             std::uint64_t seed, int workers = 1) {
  if (model.param_dim() != 1) throw ConfigError("brute_force_posterior: needs a 1-d model");
  if (grid.size() < 2) throw ConfigError("brute_force_posterior: need at least 2 grid points");
  if (reps < 1000) throw ConfigError("brute_force_posterior: need reps >= 1000");
  const double spacing = grid[1] - grid[0];
  if (!(spacing > 0.0)) throw ConfigError("brute_force_posterior: grid must be ascending");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - grid[i - 1] - spacing) > 1e-9 * spacing)
      throw ConfigError("brute_force_posterior: grid must be uniformly spaced");
  }

  const std::uint64_t root = detail::mix64(seed ^ 0xC2B2AE3D27D4EB4FULL);
  std::vector<double> phat(grid.size(), 0.0);

  auto worker = [&](std::size_t begin, std::size_t end) {
    ParameterPoint theta(1);
    for (std::size_t i = begin; i < end; ++i) {
      StreamRng rng = StreamRng::for_index(root, i);
      theta.values[0] = grid[i];
      std::uint64_t hits = 0;
      for (std::uint64_t r = 0; r < reps; ++r) {
        const auto data = model.simulate(theta, rng);
        const SummaryVector s = model.summarize(data);
        if (euclidean_distance(s, observed) <= eps) ++hits;
      }
      phat[i] = static_cast<double>(hits) / static_cast<double>(reps);
    }
  };

  const int W = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  if (W == 1) {
    worker(0, grid.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (grid.size() + static_cast<std::size_t>(W) - 1) / static_cast<std::size_t>(W);
    for (int w = 0; w < W; ++w) {
      const std::size_t b = static_cast<std::size_t>(w) * chunk;
      const std::size_t e = std::min(grid.size(), b + chunk);
      if (b < e) threads.emplace_back(worker, b, e);
    }
    for (auto& t : threads) t.join();
  }

  DensityEstimate est;
  est.grid = grid;
  est.bin_width = spacing;
  est.values.resize(grid.size());
  double total = 0.0;
  ParameterPoint theta(1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    theta.values[0] = grid[i];
    est.values[i] = model.prior_density(theta) * phat[i];
    total += est.values[i] * spacing;
  }
  if (!(total > 0.0))
    throw DegenerateError("brute_force_posterior: zero acceptance mass on the whole grid");
  for (auto& v : est.values) v /= total;
  return est;
}

}  // namespace abcr
