#pragma once

// Iterative MMSE interference alignment over the three-slot frame, and the
// interference-oblivious MRT/MRC beamformers used as a benchmark.
//
// Slot 1: A -> RS and P1 -> RP.  Slot 2: B -> RS and P2 -> RP.
// Slot 3: RS -> {A, B} and RP -> {P1, P2}.
// Every filter is a single column (one stream per node).

#include <array>
#include <functional>
#include <numbers>
#include <span>

#include "cogrelay/core_model.hpp"

namespace cogrelay {

enum class Filter : int {
  V_A = 0, V_B, V_P1, V_P2, V_RS, V_RP,        // precoders
  U_RS1, U_RS2, U_RP1, U_RP2,                  // relay decoders, slots 1 and 2
  U_A, U_B, U_P1, U_P2,                        // slot-3 decoders
};
inline constexpr int kFilterCount = 14;
inline constexpr int kDecoderCount = 8;

const char* filter_name(Filter f);
inline constexpr bool is_decoder(Filter f) { return static_cast<int>(f) >= static_cast<int>(Filter::U_RS1); }
/// Position of a decoder in IaDiagnostics::receivers.
inline constexpr int decoder_index(Filter f) { return static_cast<int>(f) - static_cast<int>(Filter::U_RS1); }

/// All precoders and decoders of one frame. Each has unit Frobenius norm.
struct BeamformerSet {
  std::array<CVector, kFilterCount> filters;

  CVector& operator[](Filter f) { return filters[static_cast<int>(f)]; }
  const CVector& operator[](Filter f) const { return filters[static_cast<int>(f)]; }
};

/// Transmit powers used while designing filters. In the reciprocal network each
/// node keeps its own power. The relay splits its power between the two
/// forwarded streams with weights (weight_a, weight_b); the primary relay uses
/// equal weights.
struct LinkPowers {
  std::array<double, kNodeCount> transmit{};
  double weight_a = 1.0 / std::numbers::sqrt2;
  double weight_b = 1.0 / std::numbers::sqrt2;

  double at(Node n) const { return transmit[static_cast<int>(n)]; }
};

/// Everything a filter update reads besides the filters themselves. Link
/// amplitudes sqrt(p_tx r^-tau) are tabulated on construction.
class IaInputs {
public:
  IaInputs(const ChannelRealization& channels, const Topology& topology,
           double path_loss_exponent, const LinkPowers& powers);

  const ChannelRealization& channels;
  const Topology& topology;
  const double path_loss_exponent;
  const LinkPowers powers;

  /// sqrt(p_tx r^-tau) for a transmission from tx to rx.
  double amplitude(Node rx, Node tx) const {
    return amplitude_[static_cast<int>(rx)][static_cast<int>(tx)];
  }

private:
  std::array<std::array<double, kNodeCount>, kNodeCount> amplitude_{};
};

/// Effective channels seen by one filter, each already scaled by
/// sqrt(p * r^-tau). Desired terms carry an extra stream weight.
struct FilterProblem {
  static constexpr int kMaxTerms = 2;
  std::array<CVector, kMaxTerms> desired;
  std::array<double, kMaxTerms> desired_weight{};
  int desired_count = 0;
  std::array<CVector, kMaxTerms> interference;
  int interference_count = 0;

  /// Weighted desired terms, as they enter the filter design.
  CVector weighted_desired(int k) const { return desired_weight[k] * desired[k]; }
};

FilterProblem filter_problem(Filter f, const IaInputs& in, const BeamformerSet& bf);

/// Unnormalized MMSE receive filter (D D^H + sum_j I_j I_j^H + I)^{-1} D.
CVector mmse_receive_filter(const CVector& desired, std::span<const CVector> interference);

/// MMSE filter towards the sum of several desired symbols:
/// (sum_k D_k D_k^H + sum_j I_j I_j^H + I)^{-1} sum_k D_k.
CVector mmse_filter(std::span<const CVector> desired, std::span<const CVector> interference);

/// Mean-square error E|u^H y - sum_k x_k|^2 for the given effective channels.
double filter_mse(const CVector& u, std::span<const CVector> desired,
                  std::span<const CVector> interference);

/// Solves one filter problem (weights applied), unnormalized.
CVector solve_filter(const FilterProblem& p);
double problem_mse(const CVector& u, const FilterProblem& p);

/// Hook invoked for every filter update inside ia_iteration, with the filter
/// value before the update and the unnormalized minimizer.
using UpdateObserver = std::function<void(Filter, const FilterProblem&, const CVector& before,
                                          const CVector& unnormalized)>;

/// One forward/reciprocal sweep: relay decoders for slots 1-2, SU/PU precoders
/// in the reciprocal network, slot-3 decoders, then both relay precoders.
BeamformerSet ia_iteration(const IaInputs& in, const BeamformerSet& bf,
                           const UpdateObserver& observer = {});

struct ReceiverDiagnostics {
  double desired_gain = 0;  // p r^-tau |u^H H v|^2
  double leakage = 0;       // post-filter interference power
  double mse = 0;           // MMSE achievable with the other filters held fixed
};

struct IaDiagnostics {
  std::array<ReceiverDiagnostics, kDecoderCount> receivers{};
  int iterations_used = 0;
  bool converged = false;

  const ReceiverDiagnostics& at(Filter decoder) const { return receivers[decoder_index(decoder)]; }
  /// Rank condition for one stream: every desired link survives its decoder.
  bool rank_ok() const;
};

IaDiagnostics leakage_and_rank_check(const IaInputs& in, const BeamformerSet& bf);

struct IaResult {
  BeamformerSet beamformers;
  IaDiagnostics diagnostics;
};

/// Iterates ia_iteration until the largest per-filter change drops below
/// `tolerance` or `max_iters` sweeps have run.
IaResult run_ia(const IaInputs& in, BeamformerSet init, int max_iters, double tolerance);

/// Largest Frobenius-norm difference between corresponding filters.
double max_filter_change(const BeamformerSet& a, const BeamformerSet& b);

BeamformerSet random_beamformers(const SystemParameters& params, RandomStream& rng);

/// Matched filters: principal singular vectors of each intended link, ignoring
/// interference. The relay precoders use the row-stacked downlink channels.
BeamformerSet mrt_mrc_beamformers(const ChannelRealization& channels);

/// Principal left/right singular vectors of a matrix, unit norm.
struct SingularPair {
  CVector left;
  CVector right;
  double value = 0;
};
SingularPair principal_singular_pair(const Eigen::MatrixXcd& m);

}  // namespace cogrelay
