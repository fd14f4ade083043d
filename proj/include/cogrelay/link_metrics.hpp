#pragma once

#include <array>

#include "cogrelay/power_opt.hpp"

namespace cogrelay {

struct TrialOutcome {
  std::array<double, 2> relay_sinr{};  // at RS, slots 1 and 2
  std::array<double, 2> su_sinr{};     // at A and B, slot 3
  bool outage = false;
  bool pre_doomed = false;  // no power split satisfies a relay-decode constraint
};

/// SINR at the secondary relay in the slot where `su` transmits.
double snr_relay(Su su, const EffectiveGains& g, const PowerAllocation& alloc,
                 const SystemParameters& params, const Topology& topology);

/// SINR at the information-processing unit of `su` in slot 3. The stream SU A
/// decodes carries weight X_A, the one SU B decodes carries X_B.
double snr_su(Su su, const EffectiveGains& g, const PowerAllocation& alloc,
              const SystemParameters& params, const Topology& topology);

/// True iff any of the four SINRs is below the threshold.
bool outage(const std::array<double, 4>& sinrs, double threshold);

TrialOutcome evaluate_links(const EffectiveGains& g, const PowerAllocation& alloc,
                            const SystemParameters& params, const Topology& topology);

}  // namespace cogrelay
