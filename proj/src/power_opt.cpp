#include "cogrelay/power_opt.hpp"

#include <cmath>

#include "cogrelay/link_metrics.hpp"

namespace cogrelay {

EffectiveGains compute_gains(const ChannelRealization& h, const BeamformerSet& bf,
                             const SystemParameters& params, const Topology& topology) {
  const double tau = params.path_loss_exponent;
  EffectiveGains g;

  const auto relay_slot = [&](Su su, Filter decoder, Filter precoder, Node primary,
                              Filter primary_precoder, double primary_power) {
    const int i = index_of(su);
    const CVector& u = bf[decoder];
    g.relay_side[i] = std::norm(u.dot(h.forward(Node::RS, node_of(su)) * bf[precoder]));
    g.relay_leakage[i] = primary_power * path_loss(topology.distance(Node::RS, primary), tau) *
                         std::norm(u.dot(h.forward(Node::RS, primary) * bf[primary_precoder]));
  };
  relay_slot(Su::A, Filter::U_RS1, Filter::V_A, Node::P1, Filter::V_P1, params.primary_power_1);
  relay_slot(Su::B, Filter::U_RS2, Filter::V_B, Node::P2, Filter::V_P2, params.primary_power_2);

  const auto downlink = [&](Su su, Filter decoder) {
    const int i = index_of(su);
    const Node n = node_of(su);
    const CVector& u = bf[decoder];
    const CVector from_rs = h.forward(n, Node::RS) * bf[Filter::V_RS];
    const CVector from_rp = h.forward(n, Node::RP) * bf[Filter::V_RP];
    g.su_side[i] = std::norm(u.dot(from_rs));
    g.harvest_rs[i] = from_rs.squaredNorm();
    g.harvest_rp[i] = from_rp.squaredNorm();
    g.su_leakage[i] = params.primary_relay_power * path_loss(topology.distance(n, Node::RP), tau) *
                      std::norm(u.dot(from_rp));
  };
  downlink(Su::A, Filter::U_A);
  downlink(Su::B, Filter::U_B);
  return g;
}

double incident_power(const EffectiveGains& g, const SystemParameters& params,
                      const Topology& topology, Su su) {
  const int i = index_of(su);
  const Node n = node_of(su);
  const double tau = params.path_loss_exponent;
  return params.relay_power * path_loss(topology.distance(Node::RS, n), tau) * g.harvest_rs[i] +
         params.primary_relay_power * path_loss(topology.distance(Node::RP, n), tau) *
             g.harvest_rp[i];
}

double compute_z(const EffectiveGains& g, const SystemParameters& params,
                 const Topology& topology, Su su) {
  const int i = index_of(su);
  const double loss = path_loss(topology.distance(Node::RS, node_of(su)), params.path_loss_exponent);
  return loss * params.conversion_efficiency * g.relay_side[i] / (1.0 + g.relay_leakage[i]) *
         incident_power(g, params, topology, su);
}

double optimal_ps(double z, double threshold) {
  if (!(z > 0.0)) return 0.0;
  return std::max(1.0 - threshold / z, 0.0);
}

double harvested_power(double rho, const EffectiveGains& g, const SystemParameters& params,
                       const Topology& topology, Su su) {
  return params.conversion_efficiency * (1.0 - rho) * incident_power(g, params, topology, su);
}

std::pair<double, double> relay_weights(double theta) {
  const double norm = std::sqrt(theta * theta + (1.0 - theta) * (1.0 - theta));
  return {(1.0 - theta) / norm, theta / norm};
}

double optimal_theta(const EffectiveGains& g, double rho_a, double rho_b,
                     const SystemParameters& params, const Topology& topology) {
  if (rho_a <= 0.0 || rho_b <= 0.0) return 0.5;
  const double tau = params.path_loss_exponent;
  const auto amplitude = [&](Su su, double rho) {
    const int i = index_of(su);
    const double loss = path_loss(topology.distance(Node::RS, node_of(su)), tau);
    return std::sqrt(loss * rho * g.su_side[i] / (1.0 + g.su_leakage[i]));
  };
  const double a = amplitude(Su::A, rho_a);
  const double b = amplitude(Su::B, rho_b);
  if (!(a + b > 0.0)) throw DegenerateChannelError("optimal_theta: both SU links are null");
  return a / (a + b);
}

double feasible_rho(double rho, const EffectiveGains& g, const SystemParameters& params,
                    const Topology& topology, Su su) {
  PowerAllocation probe;
  const int i = index_of(su);
  for (int step = 0; step < 256 && rho > 0.0; ++step) {
    probe.harvested[i] = harvested_power(rho, g, params, topology, su);
    if (snr_relay(su, g, probe, params, topology) >= params.threshold_snr) break;
    rho = std::nextafter(rho, 0.0);
  }
  return std::max(rho, 0.0);
}

std::optional<GridOptimum> grid_oracle(const EffectiveGains& g, const SystemParameters& params,
                                       const Topology& topology, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid_oracle: grid size must be >= 2");
  const double step = 1.0 / (grid_size - 1);

  // SU SINR at rho = 1 and unit stream weight; the true SINR scales with rho w^2.
  PowerAllocation unit;
  unit.rho = {1.0, 1.0};
  unit.weight = {1.0, 1.0};
  const double base_a = snr_su(Su::A, g, unit, params, topology);
  const double base_b = snr_su(Su::B, g, unit, params, topology);

  const auto feasible = [&](Su su, double rho) {
    PowerAllocation probe;
    probe.harvested[index_of(su)] = harvested_power(rho, g, params, topology, su);
    return snr_relay(su, g, probe, params, topology) >= params.threshold_snr;
  };

  std::optional<GridOptimum> best;
  for (int ia = 0; ia < grid_size; ++ia) {
    const double rho_a = ia * step;
    if (!feasible(Su::A, rho_a)) continue;
    for (int ib = 0; ib < grid_size; ++ib) {
      const double rho_b = ib * step;
      if (!feasible(Su::B, rho_b)) continue;
      for (int it = 0; it < grid_size; ++it) {
        const double theta = it * step;
        const auto [xa, xb] = relay_weights(theta);
        const double value = std::min(base_a * rho_a * xa * xa, base_b * rho_b * xb * xb);
        if (!best || value > best->min_sinr) best = GridOptimum{rho_a, rho_b, theta, value};
      }
    }
  }
  return best;
}

LinkPowers link_powers(const SystemParameters& params, const PowerAllocation& alloc) {
  LinkPowers p;
  p.transmit[static_cast<int>(Node::A)] = alloc.harvested[0];
  p.transmit[static_cast<int>(Node::B)] = alloc.harvested[1];
  p.transmit[static_cast<int>(Node::RS)] = params.relay_power;
  p.transmit[static_cast<int>(Node::P1)] = params.primary_power_1;
  p.transmit[static_cast<int>(Node::P2)] = params.primary_power_2;
  p.transmit[static_cast<int>(Node::RP)] = params.primary_relay_power;
  p.weight_a = alloc.weight[0];
  p.weight_b = alloc.weight[1];
  return p;
}

}  // namespace cogrelay
