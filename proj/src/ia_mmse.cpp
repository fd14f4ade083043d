#include "cogrelay/ia_mmse.hpp"

#include <cmath>
#include <numbers>

namespace cogrelay {

namespace {

constexpr double kEqualWeight = 1.0 / std::numbers::sqrt2;
constexpr double kRankFloor = 1e-9;

Node owner_of(Filter f) {
  switch (f) {
    case Filter::V_A: case Filter::U_A: return Node::A;
    case Filter::V_B: case Filter::U_B: return Node::B;
    case Filter::V_P1: case Filter::U_P1: return Node::P1;
    case Filter::V_P2: case Filter::U_P2: return Node::P2;
    case Filter::V_RS: case Filter::U_RS1: case Filter::U_RS2: return Node::RS;
    case Filter::V_RP: case Filter::U_RP1: case Filter::U_RP2: return Node::RP;
  }
  return Node::A;
}

// Builds effective channels sqrt(p_tx r^-tau) H f for one filter problem.
class TermBuilder {
public:
  TermBuilder(const IaInputs& in, const BeamformerSet& bf) : in_(in), bf_(bf) {}

  // Forward network: tx transmits with precoder `f`, rx receives.
  CVector forward(Node rx, Node tx, Filter f) const {
    return in_.amplitude(rx, tx) * in_.channels.forward(rx, tx).lazyProduct(bf_[f]);
  }

  // Reciprocal network: tx transmits with its decoder `f` over the adjoint of
  // the forward channel tx <- rx.
  CVector reciprocal(Node rx, Node tx, Filter f) const {
    return in_.amplitude(rx, tx) * in_.channels.forward(tx, rx).adjoint().lazyProduct(bf_[f]);
  }

private:
  const IaInputs& in_;
  const BeamformerSet& bf_;
};

void add_desired(FilterProblem& p, CVector v, double weight = 1.0) {
  p.desired[p.desired_count] = std::move(v);
  p.desired_weight[p.desired_count] = weight;
  ++p.desired_count;
}

void add_interference(FilterProblem& p, CVector v) {
  p.interference[p.interference_count++] = std::move(v);
}

CVector normalized_or(const CVector& candidate, const CVector& fallback) {
  const double n = candidate.norm();
  if (n > 0.0 && std::isfinite(n)) return candidate / n;
  return fallback;
}

void update(Filter f, const IaInputs& in, BeamformerSet& bf, const UpdateObserver& observer) {
  const FilterProblem p = filter_problem(f, in, bf);
  const CVector u = solve_filter(p);
  if (observer) observer(f, p, bf[f], u);
  bf[f] = normalized_or(u, bf[f]);
}

}  // namespace

IaInputs::IaInputs(const ChannelRealization& channels_, const Topology& topology_,
                   double path_loss_exponent_, const LinkPowers& powers_)
    : channels(channels_), topology(topology_), path_loss_exponent(path_loss_exponent_),
      powers(powers_) {
  for (int k = 0; k < kLinkCount; ++k) {
    const Node rx = receiver_of(static_cast<Link>(k));
    const Node tx = transmitter_of(static_cast<Link>(k));
    const double loss = path_loss(topology.distance(rx, tx), path_loss_exponent);
    amplitude_[static_cast<int>(rx)][static_cast<int>(tx)] = std::sqrt(powers.at(tx) * loss);
    amplitude_[static_cast<int>(tx)][static_cast<int>(rx)] = std::sqrt(powers.at(rx) * loss);
  }
}

const char* filter_name(Filter f) {
  static constexpr std::array<const char*, kFilterCount> kNames{
      "V_A", "V_B", "V_P1", "V_P2", "V_RS", "V_RP", "U_RS1",
      "U_RS2", "U_RP1", "U_RP2", "U_A", "U_B", "U_P1", "U_P2"};
  return kNames[static_cast<int>(f)];
}

FilterProblem filter_problem(Filter f, const IaInputs& in, const BeamformerSet& bf) {
  const TermBuilder t(in, bf);
  const double wa = in.powers.weight_a;
  const double wb = in.powers.weight_b;
  FilterProblem p;
  switch (f) {
    // Slots 1 and 2, relays decode.
    case Filter::U_RS1:
      add_desired(p, t.forward(Node::RS, Node::A, Filter::V_A));
      add_interference(p, t.forward(Node::RS, Node::P1, Filter::V_P1));
      break;
    case Filter::U_RS2:
      add_desired(p, t.forward(Node::RS, Node::B, Filter::V_B));
      add_interference(p, t.forward(Node::RS, Node::P2, Filter::V_P2));
      break;
    case Filter::U_RP1:
      add_desired(p, t.forward(Node::RP, Node::P1, Filter::V_P1));
      add_interference(p, t.forward(Node::RP, Node::A, Filter::V_A));
      break;
    case Filter::U_RP2:
      add_desired(p, t.forward(Node::RP, Node::P2, Filter::V_P2));
      add_interference(p, t.forward(Node::RP, Node::B, Filter::V_B));
      break;
    // Slots 1 and 2 reversed: relays send with their decoders.
    case Filter::V_A:
      add_desired(p, t.reciprocal(Node::A, Node::RS, Filter::U_RS1));
      add_interference(p, t.reciprocal(Node::A, Node::RP, Filter::U_RP1));
      break;
    case Filter::V_B:
      add_desired(p, t.reciprocal(Node::B, Node::RS, Filter::U_RS2));
      add_interference(p, t.reciprocal(Node::B, Node::RP, Filter::U_RP2));
      break;
    case Filter::V_P1:
      add_desired(p, t.reciprocal(Node::P1, Node::RP, Filter::U_RP1));
      add_interference(p, t.reciprocal(Node::P1, Node::RS, Filter::U_RS1));
      break;
    case Filter::V_P2:
      add_desired(p, t.reciprocal(Node::P2, Node::RP, Filter::U_RP2));
      add_interference(p, t.reciprocal(Node::P2, Node::RS, Filter::U_RS2));
      break;
    // Slot 3, end nodes decode after cancelling their own stream.
    case Filter::U_A:
      add_desired(p, t.forward(Node::A, Node::RS, Filter::V_RS), wa);
      add_interference(p, t.forward(Node::A, Node::RP, Filter::V_RP));
      break;
    case Filter::U_B:
      add_desired(p, t.forward(Node::B, Node::RS, Filter::V_RS), wb);
      add_interference(p, t.forward(Node::B, Node::RP, Filter::V_RP));
      break;
    case Filter::U_P1:
      add_desired(p, t.forward(Node::P1, Node::RP, Filter::V_RP), kEqualWeight);
      add_interference(p, t.forward(Node::P1, Node::RS, Filter::V_RS));
      break;
    case Filter::U_P2:
      add_desired(p, t.forward(Node::P2, Node::RP, Filter::V_RP), kEqualWeight);
      add_interference(p, t.forward(Node::P2, Node::RS, Filter::V_RS));
      break;
    // Slot 3 reversed: relays receive both streams of their own network.
    // Each SU's reciprocal term carries the weight of the stream it sent
    // (X_B for A, X_A for B), as in the relay-precoder closed form. Pairing
    // it with the decoded stream instead makes theta* and V_RS reinforce each
    // other until one downlink collapses.
    case Filter::V_RS:
      add_desired(p, t.reciprocal(Node::RS, Node::A, Filter::U_A), wb);
      add_desired(p, t.reciprocal(Node::RS, Node::B, Filter::U_B), wa);
      add_interference(p, t.reciprocal(Node::RS, Node::P1, Filter::U_P1));
      add_interference(p, t.reciprocal(Node::RS, Node::P2, Filter::U_P2));
      break;
    case Filter::V_RP:
      add_desired(p, t.reciprocal(Node::RP, Node::P1, Filter::U_P1), kEqualWeight);
      add_desired(p, t.reciprocal(Node::RP, Node::P2, Filter::U_P2), kEqualWeight);
      add_interference(p, t.reciprocal(Node::RP, Node::A, Filter::U_A));
      add_interference(p, t.reciprocal(Node::RP, Node::B, Filter::U_B));
      break;
  }
  return p;
}

CVector mmse_filter(std::span<const CVector> desired, std::span<const CVector> interference) {
  if (desired.empty()) throw std::invalid_argument("mmse_filter: no desired term");
  const int n = static_cast<int>(desired.front().size());

  // Lower triangle of C = I + sum t t^H, then an in-place Cholesky solve.
  // Hand-rolled on fixed arrays: at these sizes it beats the generic dense
  // path by a wide margin and stays backward stable at large link powers.
  Complex c[kMaxAntennas][kMaxAntennas];
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k <= r; ++k) c[r][k] = r == k ? 1.0 : 0.0;
  }
  const auto accumulate = [&](const CVector& t) {
    if (t.size() != n) throw std::invalid_argument("mmse_filter: dimension mismatch");
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k <= r; ++k) c[r][k] += t(r) * std::conj(t(k));
    }
  };
  CVector u = CVector::Zero(n);
  for (const auto& d : desired) {
    accumulate(d);
    u += d;
  }
  for (const auto& i : interference) accumulate(i);

  for (int j = 0; j < n; ++j) {
    double diag = c[j][j].real();
    for (int k = 0; k < j; ++k) diag -= std::norm(c[j][k]);
    const double l = std::sqrt(diag);
    c[j][j] = l;
    for (int r = j + 1; r < n; ++r) {
      Complex v = c[r][j];
      for (int k = 0; k < j; ++k) v -= c[r][k] * std::conj(c[j][k]);
      c[r][j] = v / l;
    }
  }
  for (int r = 0; r < n; ++r) {
    Complex v = u(r);
    for (int k = 0; k < r; ++k) v -= c[r][k] * u(k);
    u(r) = v / c[r][r].real();
  }
  for (int r = n - 1; r >= 0; --r) {
    Complex v = u(r);
    for (int k = r + 1; k < n; ++k) v -= std::conj(c[k][r]) * u(k);
    u(r) = v / c[r][r].real();
  }
  return u;
}

CVector mmse_receive_filter(const CVector& desired, std::span<const CVector> interference) {
  return mmse_filter(std::span<const CVector>(&desired, 1), interference);
}

double filter_mse(const CVector& u, std::span<const CVector> desired,
                  std::span<const CVector> interference) {
  double mse = u.squaredNorm();
  for (const auto& d : desired) mse += std::norm(u.dot(d) - 1.0);
  for (const auto& i : interference) mse += std::norm(u.dot(i));
  return mse;
}

namespace {

struct WeightedTerms {
  std::array<CVector, FilterProblem::kMaxTerms> desired;
  int count = 0;

  std::span<const CVector> view() const { return {desired.data(), static_cast<size_t>(count)}; }
};

WeightedTerms weighted(const FilterProblem& p) {
  WeightedTerms w;
  for (int k = 0; k < p.desired_count; ++k) w.desired[k] = p.weighted_desired(k);
  w.count = p.desired_count;
  return w;
}

std::span<const CVector> interference_of(const FilterProblem& p) {
  return {p.interference.data(), static_cast<size_t>(p.interference_count)};
}

}  // namespace

CVector solve_filter(const FilterProblem& p) {
  const WeightedTerms w = weighted(p);
  return mmse_filter(w.view(), interference_of(p));
}

double problem_mse(const CVector& u, const FilterProblem& p) {
  const WeightedTerms w = weighted(p);
  return filter_mse(u, w.view(), interference_of(p));
}

BeamformerSet ia_iteration(const IaInputs& in, const BeamformerSet& bf,
                           const UpdateObserver& observer) {
  BeamformerSet out = bf;
  // Filters within each group depend only on filters of earlier groups.
  for (Filter f : {Filter::U_RS1, Filter::U_RS2, Filter::U_RP1, Filter::U_RP2}) update(f, in, out, observer);
  for (Filter f : {Filter::V_A, Filter::V_B, Filter::V_P1, Filter::V_P2}) update(f, in, out, observer);
  for (Filter f : {Filter::U_A, Filter::U_B, Filter::U_P1, Filter::U_P2}) update(f, in, out, observer);
  for (Filter f : {Filter::V_RS, Filter::V_RP}) update(f, in, out, observer);
  return out;
}

bool IaDiagnostics::rank_ok() const {
  for (const auto& r : receivers) {
    if (!(r.desired_gain > kRankFloor)) return false;
  }
  return true;
}

IaDiagnostics leakage_and_rank_check(const IaInputs& in, const BeamformerSet& bf) {
  IaDiagnostics diag;
  for (int k = 0; k < kDecoderCount; ++k) {
    const auto f = static_cast<Filter>(static_cast<int>(Filter::U_RS1) + k);
    const FilterProblem p = filter_problem(f, in, bf);
    const CVector& u = bf[f];
    auto& r = diag.receivers[k];
    r.desired_gain = std::norm(u.dot(p.desired[0]));
    r.leakage = 0.0;
    for (int j = 0; j < p.interference_count; ++j) r.leakage += std::norm(u.dot(p.interference[j]));
    r.mse = problem_mse(solve_filter(p), p);
  }
  return diag;
}

double max_filter_change(const BeamformerSet& a, const BeamformerSet& b) {
  double worst = 0.0;
  for (int k = 0; k < kFilterCount; ++k) {
    worst = std::max(worst, (a.filters[k] - b.filters[k]).norm());
  }
  return worst;
}

IaResult run_ia(const IaInputs& in, BeamformerSet init, int max_iters, double tolerance) {
  IaResult result{std::move(init), {}};
  int used = 0;
  bool converged = false;
  while (used < max_iters) {
    BeamformerSet next = ia_iteration(in, result.beamformers);
    const double change = max_filter_change(next, result.beamformers);
    result.beamformers = std::move(next);
    ++used;
    if (change < tolerance) {
      converged = true;
      break;
    }
  }
  result.diagnostics = leakage_and_rank_check(in, result.beamformers);
  result.diagnostics.iterations_used = used;
  result.diagnostics.converged = converged;
  return result;
}

BeamformerSet random_beamformers(const SystemParameters& params, RandomStream& rng) {
  BeamformerSet bf;
  for (int k = 0; k < kFilterCount; ++k) {
    const int n = params.antennas_at(owner_of(static_cast<Filter>(k)));
    CVector v = complex_gaussian(n, 1, rng);
    bf.filters[k] = v / v.norm();
  }
  return bf;
}

SingularPair principal_singular_pair(const Eigen::MatrixXcd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SingularPair out;
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0);
  out.value = svd.singularValues()(0);
  return out;
}

BeamformerSet mrt_mrc_beamformers(const ChannelRealization& h) {
  BeamformerSet bf;
  const auto uplink = [&](Link link, Filter precoder, Filter decoder) {
    const SingularPair sp = principal_singular_pair(h.forward(link));
    bf[precoder] = sp.right;
    bf[decoder] = sp.left;
  };
  uplink(Link::RS_A, Filter::V_A, Filter::U_RS1);
  uplink(Link::RS_B, Filter::V_B, Filter::U_RS2);
  uplink(Link::RP_P1, Filter::V_P1, Filter::U_RP1);
  uplink(Link::RP_P2, Filter::V_P2, Filter::U_RP2);

  const auto broadcast = [&](Link first, Link second) {
    const CMatrix& h1 = h.forward(first);
    const CMatrix& h2 = h.forward(second);
    Eigen::MatrixXcd stacked(h1.rows() + h2.rows(), h1.cols());
    stacked << h1, h2;
    return principal_singular_pair(stacked).right;
  };
  bf[Filter::V_RS] = broadcast(Link::A_RS, Link::B_RS);
  bf[Filter::V_RP] = broadcast(Link::P1_RP, Link::P2_RP);

  // Combine along the effective channel H v; on the uplinks this coincides with
  // the principal left singular vector.
  const auto combine = [&](Link link, Filter precoder, Filter decoder) {
    const CVector eff = h.forward(link) * bf[precoder];
    bf[decoder] = eff / eff.norm();
  };
  combine(Link::A_RS, Filter::V_RS, Filter::U_A);
  combine(Link::B_RS, Filter::V_RS, Filter::U_B);
  combine(Link::P1_RP, Filter::V_RP, Filter::U_P1);
  combine(Link::P2_RP, Filter::V_RP, Filter::U_P2);
  return bf;
}

}  // namespace cogrelay
