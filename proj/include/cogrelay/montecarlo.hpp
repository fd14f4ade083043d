#pragma once

// Trial orchestration for each transmission scheme and Monte-Carlo outage
// estimation over parameter sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include "cogrelay/core_model.hpp"
#include "cogrelay/ia_mmse.hpp"
#include "cogrelay/link_metrics.hpp"
#include "cogrelay/power_opt.hpp"

namespace cogrelay {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class SchemeKind {
  Proposed,            // closed-form rho* and theta*, MMSE-IA beamformers
  StaticEqualPs,       // fixed rho_A = rho_B, theta*, MMSE-IA beamformers
  MrtMrc,              // rho* and theta*, matched-filter beamformers
  StaticPowerControl,  // rho*, theta = 0.5, MMSE-IA beamformers
};

struct Scheme {
  SchemeKind kind = SchemeKind::Proposed;
  double fixed_rho = 0.5;  // StaticEqualPs only

  /// proposed, static_ps_<rho>, mrt_mrc, static_pc
  std::string name() const;
  static Scheme parse(const std::string& name);
  /// Proposed plus every benchmark, with the equal-split ratios 0.3, 0.5, 0.7.
  static std::vector<Scheme> all();
  static std::vector<Scheme> benchmarks();

  bool operator==(const Scheme&) const = default;
};

/// Power allocation a scheme applies to one set of effective gains.
PowerAllocation allocate_power(const Scheme& scheme, const EffectiveGains& g,
                               const SystemParameters& params, const Topology& topology);

/// Everything produced by one trial, for inspection in tests and tools.
struct TrialTrace {
  ChannelRealization channels;
  BeamformerSet beamformers;
  EffectiveGains gains;
  PowerAllocation allocation;
  IaDiagnostics diagnostics;
  TrialOutcome outcome;
  int outer_iterations = 0;
};

TrialTrace trace_trial(const Scheme& scheme, const SystemParameters& params,
                       const Topology& topology, RandomStream& rng);

TrialOutcome run_trial(const Scheme& scheme, const SystemParameters& params,
                       const Topology& topology, RandomStream& rng);

struct WilsonInterval {
  double low = 0;
  double high = 1;
};
/// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials);

struct OutageEstimate {
  std::string scheme;
  std::string sweep_variable;
  double sweep_value = 0;
  std::int64_t trials = 0;
  std::int64_t outages = 0;
  double probability = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::uint64_t seed = 0;
};

/// Trial i always draws from trial_stream(seed, i), so every scheme sees the
/// same channels for the same index and the result does not depend on `workers`.
OutageEstimate estimate_outage(const Scheme& scheme, const SystemParameters& params,
                               const Topology& topology, std::int64_t trials,
                               std::uint64_t seed, int workers = 1);

/// Parameters and node placement before any sweep is applied.
struct Scenario {
  SystemParameters params;
  Topology::Base base;
};

struct SweepSpec {
  std::string variable = "gamma_th_db";  // gamma_th_db | p_rs_dbm | n_su | r_a_rs
  std::vector<double> values;
};

bool is_sweep_variable(const std::string& name);

/// Scenario at one sweep point. r_a_rs moves RS along the fixed A-B segment;
/// n_su sets N_A = N_B.
Scenario apply_sweep_value(const Scenario& base, const std::string& variable, double value);

/// One estimate per (scheme, value), sharing the master seed across points and
/// schemes.
std::vector<OutageEstimate> sweep(const Scenario& base, const std::vector<Scheme>& schemes,
                                  const SweepSpec& spec, std::int64_t trials,
                                  std::uint64_t seed, int workers = 1);

}  // namespace cogrelay
