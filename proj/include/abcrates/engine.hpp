#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/rng.hpp"

namespace abcr {

// Either a fixed tolerance (eps > 0, +infinity permitted to accept all) or an
// empirical quantile of pilot-run distances.
class ToleranceSpec {
 public:
  static ToleranceSpec fixed(double eps) {
    if (!(eps > 0.0)) throw ConfigError("ToleranceSpec: fixed tolerance must be positive");
    ToleranceSpec t;
    t.fixed_ = true;
    t.eps_ = eps;
    return t;
  }

  static ToleranceSpec quantile(double q, std::uint64_t pilot_draws) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("ToleranceSpec: quantile must lie in (0,1)");
    if (pilot_draws < 100) throw ConfigError("ToleranceSpec: need at least 100 pilot draws");
    ToleranceSpec t;
    t.fixed_ = false;
    t.q_ = q;
    t.pilot_ = pilot_draws;
    return t;
  }

  bool is_fixed() const { return fixed_; }
  double fixed_value() const { return eps_; }
  double q() const { return q_; }
  std::uint64_t pilot_draws() const { return pilot_; }

 private:
  ToleranceSpec() = default;
  bool fixed_ = true;
  double eps_ = 1.0;
  double q_ = 0.5;
  std::uint64_t pilot_ = 0;
};

struct RunConfig {
  std::uint64_t total_draws = 0;  // M
  ToleranceSpec tolerance = ToleranceSpec::fixed(1.0);
  std::uint64_t seed = 0;
  int workers = 1;
};

// Empirical quantile with linear interpolation between order statistics
// (R type 7); the midpoint convention at ties follows from interpolating
// between equal values.
inline double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientDataError("empirical_quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("empirical_quantile: q must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace detail {

inline constexpr std::uint64_t kPilotSalt = 0xA5B35705A3D1E041ULL;

}  // namespace detail

// Resolves a ToleranceSpec to a concrete epsilon. Quantile specs simulate
// pilot_draws (theta, summary) pairs on streams derived from `rng` and return
// the empirical q-quantile of the distances. A degenerate pilot (all
// distances equal) returns that common value and sets *degenerate.
inline double resolve_tolerance(const GenerativeModel& model, const SummaryVector& observed,
                                const ToleranceSpec& spec, StreamRng& rng,
                                bool* degenerate = nullptr) {
  if (degenerate) *degenerate = false;
  if (spec.is_fixed()) return spec.fixed_value();
  if (observed.size() != model.summary_dim())
    throw DimensionError("resolve_tolerance: observed summary has wrong length");

  const std::uint64_t root = rng.next_u64();
  std::vector<double> dist(spec.pilot_draws());
  ParameterPoint theta(model.param_dim());
  SummaryVector summary(model.summary_dim());
  for (std::uint64_t i = 0; i < spec.pilot_draws(); ++i) {
    StreamRng draw_rng = StreamRng::for_index(root, i);
    model.prior_sample(draw_rng, theta);
    model.sample_summary(theta, draw_rng, summary);
    dist[i] = euclidean_distance(summary, observed);
  }
  const auto [mn, mx] = std::minmax_element(dist.begin(), dist.end());
  if (*mn == *mx) {
    if (degenerate) *degenerate = true;
    return *mn;
  }
  return empirical_quantile(std::move(dist), spec.q());
}

// Accept/reject ABC. Simulates exactly cfg.total_draws parameters from the
// prior and keeps those whose summary lands within epsilon of `observed`
// (boundary inclusive). Draw i runs on the stream derived from (seed, i), so
// the output is bitwise identical for any worker count.
inline ReferenceTable run_rejection(const GenerativeModel& model, const SummaryVector& observed,
                                    const RunConfig& cfg) {
  if (observed.size() != model.summary_dim())
    throw DimensionError("run_rejection: observed summary has wrong length");
  if (cfg.workers < 1) throw ConfigError("run_rejection: workers must be >= 1");

  ReferenceTable table;
  table.observed_summary = observed;
  table.seed = cfg.seed;
  table.total_simulated = cfg.total_draws;

  bool degenerate_pilot = false;
  StreamRng pilot_rng(detail::mix64(cfg.seed ^ detail::kPilotSalt));
  const double eps =
      resolve_tolerance(model, observed, cfg.tolerance, pilot_rng, &degenerate_pilot);
  table.epsilon = eps;
  table.degenerate_pilot_warning = degenerate_pilot;

  if (cfg.total_draws == 0) {
    table.zero_acceptance_warning = true;
    return table;
  }

  const std::uint64_t M = cfg.total_draws;
  const int workers = (M < 10000) ? 1 : cfg.workers;

  auto scan = [&](std::uint64_t begin, std::uint64_t end, std::vector<AcceptedDraw>& out) {
    ParameterPoint theta(model.param_dim());
    SummaryVector summary(model.summary_dim());
    double dist = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      StreamRng rng = StreamRng::for_index(cfg.seed, i);
      model.prior_sample(rng, theta);
      if (model.sample_summary_within(theta, observed, eps, rng, summary, dist))
        out.push_back(AcceptedDraw{theta, summary, dist});
    }
  };

  if (workers == 1) {
    scan(0, M, table.draws);
  } else {
    std::vector<std::vector<AcceptedDraw>> parts(static_cast<std::size_t>(workers));
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::uint64_t begin = M / static_cast<std::uint64_t>(workers) * static_cast<std::uint64_t>(w) +
                                  std::min<std::uint64_t>(static_cast<std::uint64_t>(w), M % static_cast<std::uint64_t>(workers));
      const std::uint64_t len = M / static_cast<std::uint64_t>(workers) +
                                (static_cast<std::uint64_t>(w) < M % static_cast<std::uint64_t>(workers) ? 1 : 0);
      threads.emplace_back([&, w, begin, len] {
        try {
          scan(begin, begin + len, parts[static_cast<std::size_t>(w)]);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    // Contiguous per-worker ranges, so appending in worker order preserves
    // draw-index order.
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    table.draws.reserve(total);
    for (auto& p : parts)
      for (auto& d : p) table.draws.push_back(std::move(d));
  }

  if (table.draws.empty()) table.zero_acceptance_warning = true;
  return table;
}

inline double acceptance_rate(const ReferenceTable& table) {
  if (table.total_simulated == 0)
    throw DomainError("acceptance_rate: undefined for a table with M = 0");
  return static_cast<double>(table.draws.size()) / static_cast<double>(table.total_simulated);
}

}  // namespace abcr
