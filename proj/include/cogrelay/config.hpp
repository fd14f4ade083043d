#pragma once

// Simulation configuration, figure presets, and CSV output.
//
// A configuration is a flat YAML mapping, for example
//
//   gamma_th_db: 1
//   p_rs_dbm: 20
//   schemes: [proposed, static_pc]
//   sweep_variable: p_rs_dbm
//   sweep_values: [10, 12, 14]
//   trials: 10000
//
// Every key is optional; absent keys take the default operating point.

#include <cstdint>
#include <string>
#include <vector>

#include "cogrelay/montecarlo.hpp"

namespace cogrelay {

struct SimConfig {
  double tau = 2.7;
  double eta = 0.8;
  double gamma_th_db = 1.0;
  double p_rs_dbm = 20.0;
  double p_p1_dbm = 35.0;
  double p_p2_dbm = 35.0;
  double p_rp_dbm = 35.0;
  int n_a = 4, n_b = 4, n_rs = 4, n_p1 = 4, n_p2 = 4, n_rp = 4;
  int d = 1;
  int max_outer = 5;
  int max_inner = 20;
  double inner_tol = 1e-6;
  double r_a_rs = 0.5;
  double r_rs_b = 0.5;
  double r_rs_rp = 2.0;
  double r_p1_rp = 0.5;
  double r_rp_p2 = 0.5;
  std::vector<std::string> schemes = default_schemes();
  std::string sweep_variable = "gamma_th_db";
  std::vector<double> sweep_values;  // empty: the single configured value
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::string output = "outage.csv";

  static std::vector<std::string> default_schemes();

  Scenario scenario() const;
  SweepSpec sweep_spec() const;
  std::vector<Scheme> scheme_list() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

/// Parses a configuration document. Unknown keys, malformed values and
/// invariant violations throw ConfigError.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

/// Serializes every key; parse_config(dump_config(c)) == c.
std::string dump_config(const SimConfig& config);

/// fig2 | fig3 | fig4 | fig5
SimConfig preset(const std::string& name);

inline constexpr const char* kCsvHeader =
    "scheme,sweep_variable,sweep_value,trials,outages,outage_prob,ci_low,ci_high,seed";

/// CSV text, rows sorted by (scheme, sweep_value).
std::string format_csv(std::vector<OutageEstimate> estimates);
void emit_csv(const std::vector<OutageEstimate>& estimates, const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace cogrelay
