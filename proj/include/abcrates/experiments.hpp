#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "abcrates/adjust.hpp"
#include "abcrates/analysis.hpp"
#include "abcrates/core.hpp"
#include "abcrates/engine.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/io.hpp"
#include "abcrates/models.hpp"
#include "abcrates/theory.hpp"
#include "abcrates/version.hpp"

namespace abcr {

// Exit codes shared by the experiment runners and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitCheckFailed = 4;

struct ExperimentResult {
  int exit_code = kExitOk;
  nlohmann::json summary;  // full summary.json content
};

namespace detail {

inline constexpr std::uint64_t kObservedSalt = 0x8C5F4E2D1B3A7968ULL;

inline std::uint64_t json_count(const nlohmann::json& j, const std::string& what) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0) throw ConfigError(what + " must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e18)
      throw ConfigError(what + " must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(what + " must be a number");
}

inline std::vector<std::uint64_t> json_count_list(const nlohmann::json& j,
                                                  const std::string& what) {
  std::vector<std::uint64_t> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(json_count(e, what));
  } else {
    out.push_back(json_count(j, what));
  }
  if (out.empty()) throw ConfigError(what + " must not be empty");
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + ": missing required field '" + key + "'");
  return *it;
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

inline void write_summary(const std::filesystem::path& out_dir, const nlohmann::json& summary) {
  auto out = open_out((out_dir / "summary.json").string());
  out << summary.dump(2) << "\n";
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// Parsed experiment configuration. One experiment per config document;
// the CLI may override seed/workers/out after parsing.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = ".";
  nlohmann::json raw;  // effective config, echoed into summaries

  static ExperimentConfig parse(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    cfg.experiment = detail::require(j, "experiment", "config").get<std::string>();
    if (cfg.experiment != "shape" && cfg.experiment != "risk" &&
        cfg.experiment != "acceptance-scaling" && cfg.experiment != "oracle-check")
      throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
    cfg.seed = detail::json_count(detail::require(j, "seed", "config"), "seed");
    cfg.workers = j.value("workers", 1);
    if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
    cfg.out_dir = j.value("out", std::string("."));
    cfg.raw = j;
    cfg.raw["workers"] = cfg.workers;
    cfg.raw["out"] = cfg.out_dir;
    return cfg;
  }

  const nlohmann::json& model() const { return detail::require(raw, "model", "config"); }
  const nlohmann::json& run() const { return detail::require(raw, "run", "config"); }
};

// ---------------------------------------------------------------------------
// shape: empirical ABC posterior vs the closed-form asymptotic density, for a
// list of n with eps = C/sqrt(n). Writes per-n reference table, histogram and
// theoretical curve CSVs plus a summary with L1 discrepancies.
// ---------------------------------------------------------------------------
inline ExperimentResult run_shape_experiment(const ExperimentConfig& cfg) {
  detail::Stopwatch clock;
  const auto& mj = cfg.model();
  const auto& rj = cfg.run();
  const int k0 = detail::require(mj, "k0", "shape.model").get<int>();
  const double theta0 = mj.value("theta0", 0.5);
  const auto n_values = detail::json_count_list(detail::require(mj, "n", "shape.model"), "n");
  const double C = rj.value("C", 1.0);
  if (!(C > 0.0)) throw ConfigError("shape.run: C must be positive");
  const auto draws = detail::json_count_list(detail::require(rj, "draws", "shape.run"), "draws");
  if (draws.size() != 1 && draws.size() != n_values.size())
    throw ConfigError("shape.run: draws must be scalar or match the n list");
  const int bins = rj.value("bins", 50);
  const int grid_points = rj.value("density_grid", 513);

  const auto out_dir = detail::prepare_out_dir(cfg.out_dir);
  nlohmann::json per_n = nlohmann::json::array();
  bool any_zero = false;

  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const std::uint64_t n = n_values[i];
    const std::uint64_t M = draws[draws.size() == 1 ? 0 : i];
    UniformShapeModel model(n, k0, theta0);
    const double eps = C / std::sqrt(static_cast<double>(n));

    StreamRng obs_rng = StreamRng::for_index(cfg.seed ^ detail::kObservedSalt, i);
    const SummaryVector observed = model.sample_summary(ParameterPoint{theta0}, obs_rng);

    RunConfig run{M, ToleranceSpec::fixed(eps), cfg.seed + i, cfg.workers};
    const ReferenceTable table = run_rejection(model, observed, run);

    const std::string tag = "n" + std::to_string(n);
    write_reference_table_csv(table, (out_dir / ("table_" + tag + ".csv")).string());
    write_reference_table_sidecar(table, (out_dir / ("table_" + tag + ".meta.json")).string());

    nlohmann::json entry;
    entry["n"] = n;
    entry["draws"] = M;
    entry["epsilon"] = eps;
    entry["accepted"] = table.draws.size();
    entry["acceptance_rate"] = acceptance_rate(table);

    if (table.draws.empty()) {
      any_zero = true;
      entry["zero_acceptance"] = true;
    } else {
      std::vector<double> thetas;
      thetas.reserve(table.draws.size());
      for (const auto& dr : table.draws) thetas.push_back(dr.theta[0]);

      const TheoreticalPosterior tp = shape_posterior_for(model, C);
      std::vector<double> grid(static_cast<std::size_t>(grid_points));
      const double half = 1.05 * tp.support_halfwidth();
      for (int g = 0; g < grid_points; ++g)
        grid[static_cast<std::size_t>(g)] =
            theta0 - half + 2.0 * half * g / (grid_points - 1);
      write_theory_density_csv(tp, grid, (out_dir / ("theory_" + tag + ".csv")).string());

      if (thetas.size() >= 100) {
        const DensityEstimate hist = estimate_density(thetas, bins);
        write_density_csv(hist, (out_dir / ("hist_" + tag + ".csv")).string());
        entry["l1_discrepancy"] = l1_discrepancy(hist, tp);
      } else {
        entry["too_few_accepted_for_histogram"] = true;
      }
    }
    per_n.push_back(entry);
  }

  ExperimentResult res;
  res.summary["config"] = cfg.raw;
  res.summary["results"]["per_n"] = per_n;
  res.summary["runtime_seconds"] = clock.seconds();
  res.summary["version"] = kVersion;
  res.exit_code = any_zero ? kExitDegenerate : kExitOk;
  detail::write_summary(out_dir, res.summary);
  return res;
}

// ---------------------------------------------------------------------------
// risk: posterior risk vs tolerance for the risk model, vanilla and
// regression-adjusted, pooled over observed-data replicates. One loose-eps
// reference table per replicate is re-filtered at each smaller eps (valid by
// the nested-tolerance property).
// ---------------------------------------------------------------------------
inline ExperimentResult run_risk_experiment(const ExperimentConfig& cfg) {
  detail::Stopwatch clock;
  const auto& mj = cfg.model();
  const auto& rj = cfg.run();
  const std::uint64_t n = detail::json_count(detail::require(mj, "n", "risk.model"), "n");
  const double theta0 = mj.value("theta0", 0.5);
  UniformRiskModel model(n, theta0);

  std::vector<double> epsilons;
  if (rj.contains("epsilons")) {
    epsilons = rj.at("epsilons").get<std::vector<double>>();
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  } else {
    const double lmin = detail::require(rj, "epsilon_log10_min", "risk.run").get<double>();
    const double lmax = detail::require(rj, "epsilon_log10_max", "risk.run").get<double>();
    const int cnt = detail::require(rj, "epsilon_count", "risk.run").get<int>();
    if (cnt < 2 || !(lmax > lmin)) throw ConfigError("risk.run: bad epsilon grid");
    for (int i = 0; i < cnt; ++i)
      epsilons.push_back(std::pow(10.0, lmax + (lmin - lmax) * i / (cnt - 1)));
  }
  if (epsilons.size() < 6)
    throw ConfigError("risk.run: need at least 6 tolerance values, got " +
                      std::to_string(epsilons.size()));
  for (const double e : epsilons)
    if (!(e > 0.0)) throw ConfigError("risk.run: tolerances must be positive");

  const std::uint64_t M = detail::json_count(detail::require(rj, "draws", "risk.run"), "draws");
  const auto replicates =
      static_cast<std::size_t>(rj.value("observed_replicates", 1));
  if (replicates < 1) throw ConfigError("risk.run: observed_replicates must be >= 1");
  const auto min_accepted = detail::json_count(rj.value("min_accepted", nlohmann::json(50)),
                                               "min_accepted");

  const ParameterPoint theta0_pt{theta0};
  const std::size_t P = epsilons.size();
  std::vector<double> sum_v(P, 0.0), sum_a(P, 0.0);
  std::vector<std::uint64_t> cnt_v(P, 0), cnt_a(P, 0);

  for (std::size_t r = 0; r < replicates; ++r) {
    StreamRng obs_rng = StreamRng::for_index(cfg.seed ^ detail::kObservedSalt, r);
    const SummaryVector observed = model.sample_summary(theta0_pt, obs_rng);

    RunConfig run{M, ToleranceSpec::fixed(epsilons.front()), cfg.seed + 7919 * (r + 1),
                  cfg.workers};
    ReferenceTable loose = run_rejection(model, observed, run);
    std::sort(loose.draws.begin(), loose.draws.end(),
              [](const AcceptedDraw& a, const AcceptedDraw& b) { return a.distance < b.distance; });

    for (std::size_t j = 0; j < P; ++j) {
      const double eps = epsilons[j];
      const auto end = std::upper_bound(
          loose.draws.begin(), loose.draws.end(), eps,
          [](double e, const AcceptedDraw& d) { return e < d.distance; });
      const auto count = static_cast<std::size_t>(end - loose.draws.begin());
      if (count == 0) continue;

      for (std::size_t t = 0; t < count; ++t) {
        const double d0 = loose.draws[t].theta[0] - theta0;
        sum_v[j] += d0 * d0;
      }
      cnt_v[j] += count;

      if (count >= model.summary_dim() + 2) {
        ReferenceTable sub;
        sub.draws.assign(loose.draws.begin(), end);
        sub.total_simulated = M;
        sub.epsilon = eps;
        sub.observed_summary = observed;
        sub.seed = loose.seed;
        const AdjustmentModel fit = fit_local_linear(sub);
        const auto adjusted = adjust_samples(sub, fit);
        for (const auto& p : adjusted) {
          const double d0 = p[0] - theta0;
          sum_a[j] += d0 * d0;
        }
        cnt_a[j] += adjusted.size();
      }
    }
  }

  RiskCurve vanilla{{}, "vanilla"}, adjusted{{}, "adjusted"};
  std::vector<std::pair<double, double>> fit_v, fit_a;
  nlohmann::json excluded = nlohmann::json::array();
  for (std::size_t j = 0; j < P; ++j) {
    if (cnt_v[j] > 0) {
      const double risk = std::sqrt(sum_v[j] / static_cast<double>(cnt_v[j]));
      vanilla.points.push_back({epsilons[j], risk, cnt_v[j]});
      if (cnt_v[j] >= min_accepted) fit_v.emplace_back(epsilons[j], risk);
    }
    if (cnt_a[j] > 0) {
      const double risk = std::sqrt(sum_a[j] / static_cast<double>(cnt_a[j]));
      adjusted.points.push_back({epsilons[j], risk, cnt_a[j]});
      if (cnt_a[j] >= min_accepted) fit_a.emplace_back(epsilons[j], risk);
    }
    if (cnt_v[j] < min_accepted) excluded.push_back(epsilons[j]);
  }

  const auto out_dir = detail::prepare_out_dir(cfg.out_dir);
  write_risk_curve_csv(vanilla, (out_dir / "risk_vanilla.csv").string());
  write_risk_curve_csv(adjusted, (out_dir / "risk_adjusted.csv").string());

  ExperimentResult res;
  res.summary["config"] = cfg.raw;
  auto& results = res.summary["results"];
  results["excluded_epsilons"] = excluded;
  int code = kExitOk;
  if (fit_v.size() >= 3) {
    const LogLogFit lf = loglog_slope(fit_v);
    results["vanilla"] = {{"slope", lf.slope}, {"intercept", lf.intercept}};
  } else {
    code = kExitDegenerate;
  }
  if (fit_a.size() >= 6) {
    const SegmentedFit sf = segmented_slope(fit_a);
    results["adjusted"] = {{"slope_left", sf.slope_left},
                           {"slope_right", sf.slope_right},
                           {"breakpoint_log10_epsilon", sf.breakpoint},
                           {"intercept", sf.intercept},
                           {"sse", sf.sse}};
  } else {
    code = kExitDegenerate;
  }
  res.summary["runtime_seconds"] = clock.seconds();
  res.summary["version"] = kVersion;
  res.exit_code = code;
  detail::write_summary(out_dir, res.summary);
  return res;
}

// ---------------------------------------------------------------------------
// acceptance-scaling: measures the acceptance rate at each n with
// eps = C/sqrt(n), fits the log-log slope in n, and self-checks it against
// the predicted exponent.
// ---------------------------------------------------------------------------
inline ExperimentResult run_acceptance_scaling_experiment(const ExperimentConfig& cfg) {
  detail::Stopwatch clock;
  const auto& mj = cfg.model();
  const auto& rj = cfg.run();
  const int k0 = detail::require(mj, "k0", "acceptance-scaling.model").get<int>();
  const double theta0 = mj.value("theta0", 0.5);
  const auto n_values =
      detail::json_count_list(detail::require(mj, "n", "acceptance-scaling.model"), "n");
  if (n_values.size() < 3)
    throw ConfigError("acceptance-scaling.model: need at least 3 values of n");
  const double C = rj.value("C", 1.0);
  const auto draws =
      detail::json_count_list(detail::require(rj, "draws", "acceptance-scaling.run"), "draws");
  if (draws.size() != 1 && draws.size() != n_values.size())
    throw ConfigError("acceptance-scaling.run: draws must be scalar or match the n list");
  const double tol = rj.value("slope_tolerance", 0.2);

  const auto out_dir = detail::prepare_out_dir(cfg.out_dir);
  std::vector<std::pair<double, double>> pts;
  nlohmann::json rows = nlohmann::json::array();
  bool any_zero = false;
  double predicted = 0.0;

  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const std::uint64_t n = n_values[i];
    const std::uint64_t M = draws[draws.size() == 1 ? 0 : i];
    UniformShapeModel model(n, k0, theta0);
    predicted = predict_acceptance_exponent(model.rate_profile(), 1);
    const double eps = C / std::sqrt(static_cast<double>(n));

    StreamRng obs_rng = StreamRng::for_index(cfg.seed ^ detail::kObservedSalt, i);
    const SummaryVector observed = model.sample_summary(ParameterPoint{theta0}, obs_rng);
    RunConfig run{M, ToleranceSpec::fixed(eps), cfg.seed + i, cfg.workers};
    const ReferenceTable table = run_rejection(model, observed, run);
    const double alpha = acceptance_rate(table);

    nlohmann::json row;
    row["n"] = n;
    row["epsilon"] = eps;
    row["draws"] = M;
    row["accepted"] = table.draws.size();
    row["acceptance_rate"] = alpha;
    rows.push_back(row);
    if (table.draws.empty()) {
      any_zero = true;
    } else {
      pts.emplace_back(static_cast<double>(n), alpha);
    }
  }

  {
    auto out = detail::open_out((out_dir / "acceptance.csv").string());
    out << "n,epsilon,draws,accepted,acceptance_rate\n";
    for (const auto& row : rows)
      out << row["n"].get<std::uint64_t>() << "," << format_double(row["epsilon"].get<double>())
          << "," << row["draws"].get<std::uint64_t>() << "," << row["accepted"].get<std::uint64_t>()
          << "," << format_double(row["acceptance_rate"].get<double>()) << "\n";
  }

  ExperimentResult res;
  res.summary["config"] = cfg.raw;
  auto& results = res.summary["results"];
  results["per_n"] = rows;
  results["predicted_exponent"] = predicted;
  results["slope_tolerance"] = tol;
  int code = kExitOk;
  if (any_zero || pts.size() < 3) {
    results["zero_acceptance"] = true;
    code = kExitDegenerate;
  } else {
    const LogLogFit fit = loglog_slope(pts);
    results["fitted_slope"] = fit.slope;
    results["matches_prediction"] = std::abs(fit.slope - predicted) <= tol;
    if (!results["matches_prediction"].get<bool>()) code = kExitCheckFailed;
  }
  res.summary["runtime_seconds"] = clock.seconds();
  res.summary["version"] = kVersion;
  res.exit_code = code;
  detail::write_summary(out_dir, res.summary);
  return res;
}

// ---------------------------------------------------------------------------
// oracle-check: rejection-ABC histogram vs the brute-force grid posterior on
// a small shape model, repeated over several seeds.
// ---------------------------------------------------------------------------
inline ExperimentResult run_oracle_check_experiment(const ExperimentConfig& cfg) {
  detail::Stopwatch clock;
  const auto& mj = cfg.model();
  const auto& rj = cfg.run();
  const std::uint64_t n = detail::json_count(detail::require(mj, "n", "oracle-check.model"), "n");
  if (n > 1000) throw ConfigError("oracle-check.model: n must be <= 1000 (grid oracle cost)");
  const int k0 = detail::require(mj, "k0", "oracle-check.model").get<int>();
  const double theta0 = mj.value("theta0", 0.5);
  UniformShapeModel model(n, k0, theta0);

  const double eps = detail::require(rj, "epsilon", "oracle-check.run").get<double>();
  if (!(eps > 0.0)) throw ConfigError("oracle-check.run: epsilon must be positive");
  const std::uint64_t M = detail::json_count(detail::require(rj, "draws", "oracle-check.run"),
                                             "draws");
  const int grid_points = rj.value("grid_points", 200);
  if (grid_points < 10) throw ConfigError("oracle-check.run: need at least 10 grid points");
  const auto reps = detail::json_count(rj.value("reps", nlohmann::json(10000)), "reps");
  const auto replicates = static_cast<std::size_t>(rj.value("replicates", 1));
  const int bins = rj.value("bins", 50);

  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int g = 0; g < grid_points; ++g)
    grid[static_cast<std::size_t>(g)] = (g + 0.5) / grid_points;

  const auto out_dir = detail::prepare_out_dir(cfg.out_dir);
  nlohmann::json rows = nlohmann::json::array();
  double max_l1 = 0.0;

  for (std::size_t r = 0; r < replicates; ++r) {
    const std::uint64_t seed_r = cfg.seed + 101 * r;
    StreamRng obs_rng = StreamRng::for_index(seed_r ^ detail::kObservedSalt, 0);
    const SummaryVector observed = model.sample_summary(ParameterPoint{theta0}, obs_rng);

    RunConfig run{M, ToleranceSpec::fixed(eps), seed_r, cfg.workers};
    const ReferenceTable table = run_rejection(model, observed, run);
    if (table.draws.empty())
      throw DegenerateError("oracle-check: zero acceptances in rejection run");
    std::vector<double> thetas;
    thetas.reserve(table.draws.size());
    for (const auto& dr : table.draws) thetas.push_back(dr.theta[0]);
    const DensityEstimate hist = estimate_density(thetas, bins);

    const DensityEstimate oracle =
        brute_force_posterior(model, observed, eps, grid, reps, seed_r, cfg.workers);
    const double l1 = l1_discrepancy(hist, oracle);
    max_l1 = std::max(max_l1, l1);

    const std::string tag = "r" + std::to_string(r);
    write_density_csv(hist, (out_dir / ("abc_density_" + tag + ".csv")).string());
    write_density_csv(oracle, (out_dir / ("oracle_density_" + tag + ".csv")).string(), "theta");

    nlohmann::json row;
    row["replicate"] = r;
    row["seed"] = seed_r;
    row["accepted"] = table.draws.size();
    row["l1_discrepancy"] = l1;
    rows.push_back(row);
  }

  ExperimentResult res;
  res.summary["config"] = cfg.raw;
  res.summary["results"]["per_replicate"] = rows;
  res.summary["results"]["max_l1_discrepancy"] = max_l1;
  res.summary["runtime_seconds"] = clock.seconds();
  res.summary["version"] = kVersion;
  res.exit_code = kExitOk;
  detail::write_summary(out_dir, res.summary);
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "shape") return run_shape_experiment(cfg);
  if (cfg.experiment == "risk") return run_risk_experiment(cfg);
  if (cfg.experiment == "acceptance-scaling") return run_acceptance_scaling_experiment(cfg);
  if (cfg.experiment == "oracle-check") return run_oracle_check_experiment(cfg);
  throw ConfigError("unknown experiment: " + cfg.experiment);
}

}  // namespace abcr
