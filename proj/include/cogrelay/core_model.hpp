#pragma once

// Physical-layer data model of the six-node network: two energy-harvesting
// secondary users (A, B) around a two-way relay RS, and a primary pair
// (P1, P2) around its own relay RP.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cogrelay {

using Complex = std::complex<double>;

/// Upper bound on antennas per node. Matrices use bounded inline storage so the
/// per-trial inner loops never touch the heap.
inline constexpr int kMaxAntennas = 16;

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                              kMaxAntennas, kMaxAntennas>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAntennas, 1>;

/// Random stream owned by a single trial.
using RandomStream = std::mt19937_64;

enum class Node : int { A = 0, B, RS, P1, P2, RP };
inline constexpr int kNodeCount = 6;

const char* node_name(Node n);

/// Secondary users, indexed 0 (A) and 1 (B). SU i transmits in slot i + 1.
enum class Su : int { A = 0, B = 1 };

inline constexpr Node node_of(Su su) { return su == Su::A ? Node::A : Node::B; }
inline constexpr int index_of(Su su) { return static_cast<int>(su); }

class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class GeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Scalar physical and algorithmic constants. Powers are linear and referenced to
/// a 0 dBm noise floor, so a unit-variance AWGN term has power 1.
struct SystemParameters {
  double path_loss_exponent = 2.7;
  double conversion_efficiency = 0.8;
  double threshold_snr = 1.2589254117941673;  // 1 dB
  double relay_power = 100.0;                 // 20 dBm
  double primary_power_1 = 3162.2776601683795;
  double primary_power_2 = 3162.2776601683795;
  double primary_relay_power = 3162.2776601683795;
  std::array<int, kNodeCount> antennas{4, 4, 4, 4, 4, 4};
  int streams = 1;
  int max_outer_iters = 5;
  int max_inner_iters = 20;
  double inner_tolerance = 1e-6;

  int antennas_at(Node n) const { return antennas[static_cast<int>(n)]; }

  /// Throws ParameterError naming the first violated invariant.
  void validate() const;
};

/// Node placement. Only the five base distances are free; the cross distances
/// between the two networks follow from a right angle at each relay.
class Topology {
public:
  struct Base {
    double a_rs = 0.5;
    double rs_b = 0.5;
    double rs_rp = 2.0;
    double p1_rp = 0.5;
    double rp_p2 = 0.5;
  };

  const Base& base() const { return base_; }
  double rs_p1() const { return rs_p1_; }
  double rs_p2() const { return rs_p2_; }
  double rp_a() const { return rp_a_; }
  double rp_b() const { return rp_b_; }

  /// Distance between two nodes joined by a modelled link. The direct A-B and
  /// P1-P2 links (and any other unmodelled pair) throw GeometryError.
  double distance(Node x, Node y) const;

private:
  friend Topology derive_topology(const Base& base);
  Base base_;
  double rs_p1_ = 0, rs_p2_ = 0, rp_a_ = 0, rp_b_ = 0;
};

Topology derive_topology(const Topology::Base& base);

/// Converts dBm to linear power relative to a 0 dBm noise floor.
double dbm_to_linear(double dbm);
double db_to_linear(double db);

inline double path_loss(double distance, double exponent) { return std::pow(distance, -exponent); }

/// Directed links of the network, named receiver_transmitter.
enum class Link : int {
  RS_A = 0, RS_B, RS_P1, RS_P2,
  RP_P1, RP_P2, RP_A, RP_B,
  A_RS, B_RS, A_RP, B_RP,
  P1_RS, P2_RS, P1_RP, P2_RP,
};
inline constexpr int kLinkCount = 16;

Node receiver_of(Link l);
Node transmitter_of(Link l);

/// One block-fading draw of every directed small-scale channel (path loss is
/// applied separately). Entries are i.i.d. CN(0, 1).
class ChannelRealization {
public:
  const CMatrix& forward(Link l) const { return links_[static_cast<int>(l)]; }
  const CMatrix& forward(Node rx, Node tx) const;

  /// Channel from tx to rx in the reciprocal network: the adjoint of the forward
  /// channel from rx to tx.
  CMatrix reciprocal(Node rx, Node tx) const { return forward(tx, rx).adjoint(); }

  CMatrix& mutable_link(Link l) { return links_[static_cast<int>(l)]; }

private:
  std::array<CMatrix, kLinkCount> links_;
};

ChannelRealization sample_channels(const SystemParameters& params, RandomStream& rng);

/// Draws an n x m matrix of i.i.d. CN(0, 1) entries.
CMatrix complex_gaussian(int rows, int cols, RandomStream& rng);

/// Stream for one trial, a pure function of (master seed, trial index).
RandomStream trial_stream(std::uint64_t master_seed, std::uint64_t trial_index);

}  // namespace cogrelay
