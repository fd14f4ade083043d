#include "cogrelay/core_model.hpp"

#include <cmath>
#include <string>

namespace cogrelay {

namespace {

struct LinkEnds {
  Node rx;
  Node tx;
};

constexpr std::array<LinkEnds, kLinkCount> kLinkEnds{{
    {Node::RS, Node::A},  {Node::RS, Node::B},  {Node::RS, Node::P1}, {Node::RS, Node::P2},
    {Node::RP, Node::P1}, {Node::RP, Node::P2}, {Node::RP, Node::A},  {Node::RP, Node::B},
    {Node::A, Node::RS},  {Node::B, Node::RS},  {Node::A, Node::RP},  {Node::B, Node::RP},
    {Node::P1, Node::RS}, {Node::P2, Node::RS}, {Node::P1, Node::RP}, {Node::P2, Node::RP},
}};

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace

const char* node_name(Node n) {
  switch (n) {
    case Node::A: return "A";
    case Node::B: return "B";
    case Node::RS: return "RS";
    case Node::P1: return "P1";
    case Node::P2: return "P2";
    case Node::RP: return "RP";
  }
  return "?";
}

void SystemParameters::validate() const {
  require(std::isfinite(path_loss_exponent) && path_loss_exponent >= 2.0,
          "tau: path-loss exponent must be >= 2");
  require(conversion_efficiency > 0.0 && conversion_efficiency <= 1.0,
          "eta: conversion efficiency must lie in (0, 1]");
  require(std::isfinite(threshold_snr) && threshold_snr > 0.0, "gamma_th: threshold must be > 0");
  require(std::isfinite(relay_power) && relay_power > 0.0, "p_rs: relay power must be > 0");
  require(std::isfinite(primary_power_1) && primary_power_1 > 0.0, "p_p1: power must be > 0");
  require(std::isfinite(primary_power_2) && primary_power_2 > 0.0, "p_p2: power must be > 0");
  require(std::isfinite(primary_relay_power) && primary_relay_power > 0.0,
          "p_rp: power must be > 0");
  require(streams >= 1, "d: streams per node must be positive");
  require(streams == 1, "d: multi-stream unsupported (only d = 1)");
  for (int k = 0; k < kNodeCount; ++k) {
    const std::string name = node_name(static_cast<Node>(k));
    require(antennas[k] >= streams, "antennas at " + name + " must be >= d");
    require(antennas[k] <= kMaxAntennas,
            "antennas at " + name + " exceed " + std::to_string(kMaxAntennas));
  }
  require(max_outer_iters >= 1, "max_outer must be positive");
  require(max_inner_iters >= 1, "max_inner must be positive");
  require(std::isfinite(inner_tolerance) && inner_tolerance >= 0.0, "inner_tol must be >= 0");
}

Topology derive_topology(const Topology::Base& base) {
  const auto check = [](double r, const char* name) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw GeometryError(std::string("distance ") + name + " must be positive");
  };
  check(base.a_rs, "r_a_rs");
  check(base.rs_b, "r_rs_b");
  check(base.rs_rp, "r_rs_rp");
  check(base.p1_rp, "r_p1_rp");
  check(base.rp_p2, "r_rp_p2");

  Topology t;
  t.base_ = base;
  t.rs_p1_ = std::hypot(base.rs_rp, base.p1_rp);
  t.rs_p2_ = std::hypot(base.rs_rp, base.rp_p2);
  t.rp_a_ = std::hypot(base.rs_rp, base.a_rs);
  t.rp_b_ = std::hypot(base.rs_rp, base.rs_b);
  return t;
}

double Topology::distance(Node x, Node y) const {
  if (static_cast<int>(x) > static_cast<int>(y)) std::swap(x, y);
  // Order: A < B < RS < P1 < P2 < RP.
  if (x == Node::A && y == Node::RS) return base_.a_rs;
  if (x == Node::B && y == Node::RS) return base_.rs_b;
  if (x == Node::RS && y == Node::RP) return base_.rs_rp;
  if (x == Node::P1 && y == Node::RP) return base_.p1_rp;
  if (x == Node::P2 && y == Node::RP) return base_.rp_p2;
  if (x == Node::RS && y == Node::P1) return rs_p1_;
  if (x == Node::RS && y == Node::P2) return rs_p2_;
  if (x == Node::A && y == Node::RP) return rp_a_;
  if (x == Node::B && y == Node::RP) return rp_b_;
  throw GeometryError(std::string("no modelled link between ") + node_name(x) + " and " +
                      node_name(y));
}

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

Node receiver_of(Link l) { return kLinkEnds[static_cast<int>(l)].rx; }
Node transmitter_of(Link l) { return kLinkEnds[static_cast<int>(l)].tx; }

const CMatrix& ChannelRealization::forward(Node rx, Node tx) const {
  for (int k = 0; k < kLinkCount; ++k) {
    if (kLinkEnds[k].rx == rx && kLinkEnds[k].tx == tx) return links_[k];
  }
  throw GeometryError(std::string("no channel from ") + node_name(tx) + " to " + node_name(rx));
}

CMatrix complex_gaussian(int rows, int cols, RandomStream& rng) {
  // CN(0, 1): real and imaginary parts each carry variance 1/2.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

ChannelRealization sample_channels(const SystemParameters& params, RandomStream& rng) {
  ChannelRealization h;
  for (int k = 0; k < kLinkCount; ++k) {
    const auto [rx, tx] = kLinkEnds[k];
    h.mutable_link(static_cast<Link>(k)) =
        complex_gaussian(params.antennas_at(rx), params.antennas_at(tx), rng);
  }
  return h;
}

RandomStream trial_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32)};
  return RandomStream(seq);
}

}  // namespace cogrelay
