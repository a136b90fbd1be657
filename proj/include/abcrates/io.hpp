#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abcrates/adjust.hpp"
#include "abcrates/analysis.hpp"
#include "abcrates/core.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/theory.hpp"

namespace abcr {

// Shortest decimal representation that round-trips a double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lg", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lg", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  return out;
}

}  // namespace detail

// One row per accepted draw: theta_1..theta_d, S_1..S_k, distance.
inline void write_reference_table_csv(const ReferenceTable& table, const std::string& path) {
  auto out = detail::open_out(path);
  const std::size_t d = table.draws.empty() ? 1 : table.draws.front().theta.size();
  const std::size_t k = table.observed_summary.size();
  for (std::size_t j = 0; j < d; ++j) out << "theta_" << (j + 1) << ",";
  for (std::size_t j = 0; j < k; ++j) out << "S_" << (j + 1) << ",";
  out << "distance\n";
  for (const auto& dr : table.draws) {
    for (std::size_t j = 0; j < dr.theta.size(); ++j) out << format_double(dr.theta[j]) << ",";
    for (std::size_t j = 0; j < dr.summary.size(); ++j) out << format_double(dr.summary[j]) << ",";
    out << format_double(dr.distance) << "\n";
  }
}

inline nlohmann::json json_number_or_infinity(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "infinity" : "-infinity";
}

inline nlohmann::json reference_table_sidecar(const ReferenceTable& table) {
  nlohmann::json j;
  j["total_simulated"] = table.total_simulated;
  j["epsilon"] = json_number_or_infinity(table.epsilon);
  j["seed"] = table.seed;
  j["accepted"] = table.draws.size();
  if (table.total_simulated > 0) {
    j["acceptance_rate"] = static_cast<double>(table.draws.size()) /
                           static_cast<double>(table.total_simulated);
  } else {
    j["acceptance_rate"] = nullptr;
  }
  j["observed_summary"] = table.observed_summary.values;
  j["zero_acceptance_warning"] = table.zero_acceptance_warning;
  j["degenerate_pilot_warning"] = table.degenerate_pilot_warning;
  return j;
}

inline void write_reference_table_sidecar(const ReferenceTable& table, const std::string& path) {
  auto out = detail::open_out(path);
  out << reference_table_sidecar(table).dump(2) << "\n";
}

// Reads a CSV written by write_reference_table_csv. Metadata comes from the
// caller (sidecar), only rows are parsed here.
inline std::vector<AcceptedDraw> read_reference_table_rows(const std::string& path, std::size_t d,
                                                           std::size_t k) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty reference table file: " + path);
  std::vector<AcceptedDraw> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    AcceptedDraw dr;
    dr.theta = ParameterPoint(d);
    dr.summary = SummaryVector(k);
    std::string cell;
    for (std::size_t j = 0; j < d; ++j) {
      std::getline(ss, cell, ',');
      dr.theta[j] = std::stod(cell);
    }
    for (std::size_t j = 0; j < k; ++j) {
      std::getline(ss, cell, ',');
      dr.summary[j] = std::stod(cell);
    }
    std::getline(ss, cell, ',');
    dr.distance = std::stod(cell);
    rows.push_back(std::move(dr));
  }
  return rows;
}

inline void write_density_csv(const DensityEstimate& est, const std::string& path,
                              const std::string& xname = "bin_center") {
  auto out = detail::open_out(path);
  out << xname << ",density\n";
  for (std::size_t i = 0; i < est.grid.size(); ++i)
    out << format_double(est.grid[i]) << "," << format_double(est.values[i]) << "\n";
}

inline void write_theory_density_csv(const TheoreticalPosterior& tp,
                                     const std::vector<double>& grid, const std::string& path) {
  auto out = detail::open_out(path);
  out << "theta,density\n";
  for (const double t : grid)
    out << format_double(t) << "," << format_double(tp.density(t)) << "\n";
}

inline void write_risk_curve_csv(const RiskCurve& curve, const std::string& path) {
  auto out = detail::open_out(path);
  out << "epsilon,risk,n_samples\n";
  for (const auto& p : curve.points)
    out << format_double(p.epsilon) << "," << format_double(p.risk) << "," << p.n_samples << "\n";
}

inline nlohmann::json adjustment_model_to_json(const AdjustmentModel& m) {
  nlohmann::json j;
  j["beta0"] = std::vector<double>(m.beta0.data(), m.beta0.data() + m.beta0.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.B.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.B.cols()));
    for (Eigen::Index c = 0; c < m.B.cols(); ++c) row[static_cast<std::size_t>(c)] = m.B(r, c);
    rows.push_back(row);
  }
  j["B"] = rows;
  j["S0"] = m.S0.values;
  j["ridge_used"] = m.ridge_used;
  return j;
}

inline AdjustmentModel adjustment_model_from_json(const nlohmann::json& j) {
  AdjustmentModel m;
  const auto b0 = j.at("beta0").get<std::vector<double>>();
  m.beta0 = Eigen::Map<const Eigen::VectorXd>(b0.data(), static_cast<Eigen::Index>(b0.size()));
  const auto& rows = j.at("B");
  const auto k = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  m.B.resize(k, d);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      m.B(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  m.S0.values = j.at("S0").get<std::vector<double>>();
  m.ridge_used = j.at("ridge_used").get<double>();
  return m;
}

}  // namespace abcr
