// Command-line driver: runs outage sweeps from a config file or a figure
// preset and writes CSV plot data.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "cogrelay/config.hpp"
#include "cogrelay/montecarlo.hpp"

namespace {

using namespace cogrelay;

struct Overrides {
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  int workers = 0;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--trials", o.trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--output", o.output, "CSV output path");
  cmd->add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
}

int run_sweep(SimConfig config, const Overrides& o) {
  if (o.trials) config.trials = *o.trials;
  if (o.seed) config.seed = *o.seed;
  if (o.output) config.output = *o.output;
  config.validate();
  const int workers =
      o.workers > 0 ? o.workers : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  const auto estimates = sweep(config.scenario(), config.scheme_list(), config.sweep_spec(),
                               config.trials, config.seed, workers);
  emit_csv(estimates, config.output);
  std::cout << "wrote " << estimates.size() << " estimates to " << config.output << '\n';
  return 0;
}

int run_oracle(const SimConfig& config, int grid, int realizations) {
  const SweepSpec spec = config.sweep_spec();
  const Scenario s = apply_sweep_value(config.scenario(), spec.variable, spec.values.front());
  const Topology topology = derive_topology(s.base);
  const Scheme proposed{SchemeKind::Proposed};

  double worst = -1.0;  // (oracle - closed form) / oracle, over feasible realizations
  int feasible = 0, violations = 0, inconsistent = 0;
  for (int k = 0; k < realizations; ++k) {
    RandomStream rng = trial_stream(config.seed, static_cast<std::uint64_t>(k));
    const TrialTrace tr = trace_trial(proposed, s.params, topology, rng);
    const auto best = grid_oracle(tr.gains, s.params, topology, grid);
    if (!best) {
      if (!tr.outcome.pre_doomed) ++inconsistent;
      continue;
    }
    ++feasible;
    const double closed = std::min(tr.outcome.su_sinr[0], tr.outcome.su_sinr[1]);
    const double gap = (best->min_sinr - closed) / best->min_sinr;
    worst = std::max(worst, gap);
    if (closed < best->min_sinr * (1.0 - 2.0 / grid)) ++violations;
  }
  std::cout << "realizations: " << realizations << "\n"
            << "feasible: " << feasible << "\n"
            << "max relative deviation (oracle - closed form) / oracle: "
            << format_double(worst) << "\n"
            << "bound violations (closed < oracle * (1 - 2/grid)): " << violations << "\n"
            << "infeasibility mismatches: " << inconsistent << "\n";
  return violations == 0 && inconsistent == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo outage simulator for relay-assisted energy-harvesting users"};
  app.require_subcommand(1);

  Overrides sim_opts;
  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "Run the sweep described by a config file");
  simulate->add_option("--config", sim_config, "Config file")->required();
  add_overrides(simulate, sim_opts);

  Overrides preset_opts;
  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Run a figure preset (fig2..fig5)");
  preset_cmd->add_option("name", preset_name, "Preset name")->required();
  add_overrides(preset_cmd, preset_opts);

  std::string oracle_config;
  int grid = 41;
  int realizations = 100;
  auto* oracle = app.add_subcommand("oracle", "Check closed-form power allocation against a grid search");
  oracle->add_option("--config", oracle_config, "Config file")->required();
  oracle->add_option("--grid", grid, "Grid points per axis")->check(CLI::Range(11, 1001));
  oracle->add_option("--realizations", realizations, "Channel realizations")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_sweep(load_config(sim_config), sim_opts);
    if (*preset_cmd) return run_sweep(preset(preset_name), preset_opts);
    if (*oracle) return run_oracle(load_config(oracle_config), grid, realizations);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
