#include "cogrelay/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace cogrelay {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string format_rho(double rho) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << rho;
  return os.str();
}

bool uses_optimal_rho(SchemeKind k) { return k != SchemeKind::StaticEqualPs; }

TrialTrace simulate(const Scheme& scheme, const SystemParameters& params,
                    const Topology& topology, RandomStream& rng, bool with_diagnostics) {
  TrialTrace tr;
  tr.channels = sample_channels(params, rng);
  const bool matched = scheme.kind == SchemeKind::MrtMrc;
  tr.beamformers = matched ? mrt_mrc_beamformers(tr.channels) : random_beamformers(params, rng);

  for (int outer = 0; outer < params.max_outer_iters; ++outer) {
    tr.outer_iterations = outer + 1;
    tr.gains = compute_gains(tr.channels, tr.beamformers, params, topology);
    tr.allocation = allocate_power(scheme, tr.gains, params, topology);
    // Matched filters do not depend on powers, one allocation pass is final.
    if (matched) break;
    const IaInputs in{tr.channels, topology, params.path_loss_exponent,
                      link_powers(params, tr.allocation)};
    IaResult ia = run_ia(in, tr.beamformers, params.max_inner_iters, params.inner_tolerance);
    tr.beamformers = std::move(ia.beamformers);
    tr.diagnostics = ia.diagnostics;
  }

  // Re-allocate against the final beamformers so the relay constraints are
  // met exactly by the filters actually used.
  if (!matched) {
    tr.gains = compute_gains(tr.channels, tr.beamformers, params, topology);
    tr.allocation = allocate_power(scheme, tr.gains, params, topology);
  }
  if (with_diagnostics) {
    const int used = tr.diagnostics.iterations_used;
    const bool converged = tr.diagnostics.converged;
    const IaInputs in{tr.channels, topology, params.path_loss_exponent,
                      link_powers(params, tr.allocation)};
    tr.diagnostics = leakage_and_rank_check(in, tr.beamformers);
    tr.diagnostics.iterations_used = used;
    tr.diagnostics.converged = converged;
  }

  tr.outcome = evaluate_links(tr.gains, tr.allocation, params, topology);
  for (Su su : {Su::A, Su::B}) {
    if (optimal_ps(compute_z(tr.gains, params, topology, su), params.threshold_snr) == 0.0) {
      tr.outcome.pre_doomed = true;
    }
  }
  if (tr.outcome.pre_doomed) tr.outcome.outage = true;
  return tr;
}

template <class Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

}  // namespace

std::string Scheme::name() const {
  switch (kind) {
    case SchemeKind::Proposed: return "proposed";
    case SchemeKind::StaticEqualPs: return "static_ps_" + format_rho(fixed_rho);
    case SchemeKind::MrtMrc: return "mrt_mrc";
    case SchemeKind::StaticPowerControl: return "static_pc";
  }
  return "?";
}

Scheme Scheme::parse(const std::string& name) {
  if (name == "proposed") return {SchemeKind::Proposed};
  if (name == "mrt_mrc") return {SchemeKind::MrtMrc};
  if (name == "static_pc") return {SchemeKind::StaticPowerControl};
  const std::string prefix = "static_ps_";
  if (name.rfind(prefix, 0) == 0) {
    const std::string tail = name.substr(prefix.size());
    std::istringstream is(tail);
    is.imbue(std::locale::classic());
    double rho = 0;
    if (is >> rho && is.eof() && rho >= 0.0 && rho <= 1.0) return {SchemeKind::StaticEqualPs, rho};
    throw ConfigError("schemes: bad static split ratio in '" + name + "'");
  }
  throw ConfigError("schemes: unknown scheme '" + name + "'");
}

std::vector<Scheme> Scheme::all() {
  std::vector<Scheme> out{{SchemeKind::Proposed}};
  for (const Scheme& s : benchmarks()) out.push_back(s);
  return out;
}

std::vector<Scheme> Scheme::benchmarks() {
  return {{SchemeKind::StaticEqualPs, 0.3},
          {SchemeKind::StaticEqualPs, 0.5},
          {SchemeKind::StaticEqualPs, 0.7},
          {SchemeKind::MrtMrc},
          {SchemeKind::StaticPowerControl}};
}

PowerAllocation allocate_power(const Scheme& scheme, const EffectiveGains& g,
                               const SystemParameters& params, const Topology& topology) {
  PowerAllocation alloc;
  for (Su su : {Su::A, Su::B}) {
    const int i = index_of(su);
    if (uses_optimal_rho(scheme.kind)) {
      const double rho = optimal_ps(compute_z(g, params, topology, su), params.threshold_snr);
      alloc.rho[i] = feasible_rho(rho, g, params, topology, su);
    } else {
      alloc.rho[i] = scheme.fixed_rho;
    }
    alloc.harvested[i] = harvested_power(alloc.rho[i], g, params, topology, su);
  }
  if (scheme.kind == SchemeKind::StaticPowerControl) {
    alloc.theta = 0.5;
  } else {
    try {
      alloc.theta = optimal_theta(g, alloc.rho[0], alloc.rho[1], params, topology);
    } catch (const DegenerateChannelError&) {
      alloc.theta = 0.5;
    }
  }
  const auto [xa, xb] = relay_weights(alloc.theta);
  alloc.weight = {xa, xb};
  return alloc;
}

TrialTrace trace_trial(const Scheme& scheme, const SystemParameters& params,
                       const Topology& topology, RandomStream& rng) {
  return simulate(scheme, params, topology, rng, true);
}

TrialOutcome run_trial(const Scheme& scheme, const SystemParameters& params,
                       const Topology& topology, RandomStream& rng) {
  return simulate(scheme, params, topology, rng, false).outcome;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::clamp(std::min(center - half, p), 0.0, 1.0),
          std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

OutageEstimate estimate_outage(const Scheme& scheme, const SystemParameters& params,
                               const Topology& topology, std::int64_t trials,
                               std::uint64_t seed, int workers) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  std::vector<unsigned char> hit(static_cast<size_t>(trials), 0);
  parallel_for(trials, workers, [&](std::int64_t i) {
    RandomStream rng = trial_stream(seed, static_cast<std::uint64_t>(i));
    hit[static_cast<size_t>(i)] = run_trial(scheme, params, topology, rng).outage ? 1 : 0;
  });

  OutageEstimate est;
  est.scheme = scheme.name();
  est.trials = trials;
  est.outages = std::count(hit.begin(), hit.end(), 1);
  est.probability = static_cast<double>(est.outages) / static_cast<double>(trials);
  const WilsonInterval ci = wilson_interval(est.outages, trials);
  est.ci_low = ci.low;
  est.ci_high = ci.high;
  est.seed = seed;
  return est;
}

bool is_sweep_variable(const std::string& name) {
  return name == "gamma_th_db" || name == "p_rs_dbm" || name == "n_su" || name == "r_a_rs";
}

Scenario apply_sweep_value(const Scenario& base, const std::string& variable, double value) {
  Scenario s = base;
  if (variable == "gamma_th_db") {
    s.params.threshold_snr = db_to_linear(value);
  } else if (variable == "p_rs_dbm") {
    s.params.relay_power = dbm_to_linear(value);
  } else if (variable == "n_su") {
    const double n = std::round(value);
    if (n != value || n < 1) throw ConfigError("sweep_values: n_su must be a positive integer");
    s.params.antennas[static_cast<int>(Node::A)] = static_cast<int>(n);
    s.params.antennas[static_cast<int>(Node::B)] = static_cast<int>(n);
  } else if (variable == "r_a_rs") {
    const double span = base.base.a_rs + base.base.rs_b;
    s.base.a_rs = value;
    s.base.rs_b = span - value;
  } else {
    throw ConfigError("sweep_variable: unknown variable '" + variable + "'");
  }
  return s;
}

std::vector<OutageEstimate> sweep(const Scenario& base, const std::vector<Scheme>& schemes,
                                  const SweepSpec& spec, std::int64_t trials,
                                  std::uint64_t seed, int workers) {
  if (!is_sweep_variable(spec.variable))
    throw ConfigError("sweep_variable: unknown variable '" + spec.variable + "'");
  if (spec.values.empty()) throw ConfigError("sweep_values: empty");
  for (size_t k = 1; k < spec.values.size(); ++k) {
    if (!(spec.values[k] > spec.values[k - 1]))
      throw ConfigError("sweep_values: must be strictly increasing");
  }

  std::vector<OutageEstimate> out;
  for (double value : spec.values) {
    const Scenario point = apply_sweep_value(base, spec.variable, value);
    point.params.validate();
    const Topology topology = derive_topology(point.base);
    for (const Scheme& scheme : schemes) {
      OutageEstimate est = estimate_outage(scheme, point.params, topology, trials, seed, workers);
      est.sweep_variable = spec.variable;
      est.sweep_value = value;
      out.push_back(std::move(est));
    }
  }
  return out;
}

}  // namespace cogrelay
