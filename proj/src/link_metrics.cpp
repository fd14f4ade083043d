#include "cogrelay/link_metrics.hpp"

#include <algorithm>

namespace cogrelay {

double snr_relay(Su su, const EffectiveGains& g, const PowerAllocation& alloc,
                 const SystemParameters& params, const Topology& topology) {
  const int i = index_of(su);
  const double loss = path_loss(topology.distance(Node::RS, node_of(su)), params.path_loss_exponent);
  return alloc.harvested[i] * loss * g.relay_side[i] / (1.0 + g.relay_leakage[i]);
}

double snr_su(Su su, const EffectiveGains& g, const PowerAllocation& alloc,
              const SystemParameters& params, const Topology& topology) {
  const int i = index_of(su);
  const double loss = path_loss(topology.distance(Node::RS, node_of(su)), params.path_loss_exponent);
  const double w = alloc.weight[i];
  return params.relay_power * loss * alloc.rho[i] * w * w * g.su_side[i] / (1.0 + g.su_leakage[i]);
}

bool outage(const std::array<double, 4>& sinrs, double threshold) {
  return std::any_of(sinrs.begin(), sinrs.end(), [&](double s) { return !(s >= threshold); });
}

TrialOutcome evaluate_links(const EffectiveGains& g, const PowerAllocation& alloc,
                            const SystemParameters& params, const Topology& topology) {
  TrialOutcome out;
  for (Su su : {Su::A, Su::B}) {
    out.relay_sinr[index_of(su)] = snr_relay(su, g, alloc, params, topology);
    out.su_sinr[index_of(su)] = snr_su(su, g, alloc, params, topology);
  }
  out.outage = outage({out.relay_sinr[0], out.relay_sinr[1], out.su_sinr[0], out.su_sinr[1]},
                      params.threshold_snr);
  return out;
}

}  // namespace cogrelay
