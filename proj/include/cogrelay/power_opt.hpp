#pragma once

// Closed-form power splitting at the secondary users and power control at the
// secondary relay, for fixed beamformers.

#include <array>
#include <optional>
#include <stdexcept>
#include <utility>

#include "cogrelay/core_model.hpp"
#include "cogrelay/ia_mmse.hpp"

namespace cogrelay {

class DegenerateChannelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Norm factors of the secondary links under one BeamformerSet, indexed by SU.
struct EffectiveGains {
  std::array<double, 2> relay_side{};      // |U_RS[j]^H H_(RS,i) V_i|^2
  std::array<double, 2> su_side{};         // |U_i^H H_(i,RS) V_RS|^2
  std::array<double, 2> harvest_rs{};      // ||H_(i,RS) V_RS||^2
  std::array<double, 2> harvest_rp{};      // ||H_(i,RP) V_RP||^2
  std::array<double, 2> relay_leakage{};   // at RS in slot j = i + 1
  std::array<double, 2> su_leakage{};      // at SU i in slot 3

  double relay_side_at(Su s) const { return relay_side[index_of(s)]; }
  double su_side_at(Su s) const { return su_side[index_of(s)]; }
};

EffectiveGains compute_gains(const ChannelRealization& channels, const BeamformerSet& bf,
                             const SystemParameters& params, const Topology& topology);

struct PowerAllocation {
  std::array<double, 2> rho{};        // information-processing share at A, B
  double theta = 0.5;                 // relay power-control factor
  std::array<double, 2> weight{};     // relay stream weights X_A, X_B
  std::array<double, 2> harvested{};  // p_A, p_B

  double rho_at(Su s) const { return rho[index_of(s)]; }
  double harvested_at(Su s) const { return harvested[index_of(s)]; }
  double weight_at(Su s) const { return weight[index_of(s)]; }
};

/// Received power available for harvesting at SU i, before the split:
/// p_RS r_(RS,i)^-tau ||H V_RS||^2 + p_RP r_(RP,i)^-tau ||H V_RP||^2.
double incident_power(const EffectiveGains& g, const SystemParameters& params,
                      const Topology& topology, Su su);

/// Relay-decode margin Z_i: the slot-i relay SINR obtained if SU i harvested
/// everything it receives (rho_i = 0).
double compute_z(const EffectiveGains& g, const SystemParameters& params,
                 const Topology& topology, Su su);

/// rho* = max(1 - gamma_th / Z, 0). Zero means no split meets the relay constraint.
double optimal_ps(double z, double threshold);

double harvested_power(double rho, const EffectiveGains& g, const SystemParameters& params,
                       const Topology& topology, Su su);

/// Relay stream weights (X_A, X_B) for power-control factor theta.
std::pair<double, double> relay_weights(double theta);

/// Max-min power-control factor. Returns 0.5 when either rho is zero; throws
/// DegenerateChannelError when both SU links carry no signal.
double optimal_theta(const EffectiveGains& g, double rho_a, double rho_b,
                     const SystemParameters& params, const Topology& topology);

/// Best point of a uniform (rho_A, rho_B, theta) grid on [0, 1]^3, subject to
/// both relay-decode constraints. Validation oracle for the closed forms.
struct GridOptimum {
  double rho_a = 0;
  double rho_b = 0;
  double theta = 0;
  double min_sinr = 0;
};
std::optional<GridOptimum> grid_oracle(const EffectiveGains& g, const SystemParameters& params,
                                       const Topology& topology, int grid_size);

/// Largest rho <= `rho` whose relay SINR, evaluated exactly as the outage test
/// does, still meets the threshold. Absorbs rounding in the closed form.
double feasible_rho(double rho, const EffectiveGains& g, const SystemParameters& params,
                    const Topology& topology, Su su);

/// Link powers for filter design under an allocation.
LinkPowers link_powers(const SystemParameters& params, const PowerAllocation& alloc);

}  // namespace cogrelay
