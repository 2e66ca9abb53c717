#include "netdyn/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "netdyn/rng.hpp"

namespace netdyn {

namespace {

struct SpikeTimes {
  std::vector<double> t;
  double first = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  std::size_t argsecond = 0;
};

SpikeTimes spike_times(const Network& net, std::span<const double> v) {
  SpikeTimes st;
  st.t.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double ti = spike_time(net, i, v[i]);
    st.t[i] = ti;
    if (ti < st.first) {
      st.second = st.first;
      st.argsecond = st.argmin;
      st.first = ti;
      st.argmin = i;
    } else if (ti < st.second) {
      st.second = ti;
      st.argsecond = i;
    }
  }
  return st;
}

// Image of the return map on a raw state (no section check).
State return_state(const Network& net, std::span<const double> v) {
  const auto spike = first_spike(net, v);
  return apply_spike(net, spike.pre_jump, spike.winners).state;
}

bool below_threshold(const Network& net, std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x < net.theta(); });
}

}  // namespace

NeuronSet zero_coordinates(std::span<const double> v) {
  NeuronSet zs;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] == 0.0) zs.push_back(static_cast<std::uint32_t>(k));
  }
  return zs;
}

SectionPoint::SectionPoint(const Network& net, State v) : v_(std::move(v)) {
  if (v_.size() != net.size()) {
    throw std::invalid_argument("SectionPoint: state has " + std::to_string(v_.size()) +
                                " entries, network has " + std::to_string(net.size()));
  }
  if (!in_cube(net, v_)) throw std::invalid_argument("SectionPoint: state outside the cube");
  zero_set_ = zero_coordinates(v_);
  if (zero_set_.empty()) throw std::invalid_argument("SectionPoint: no coordinate is zero");
}

SystemConstants system_constants(const Network& net) {
  const auto& p = net.params();
  SystemConstants c;
  double min_gap = std::numeric_limits<double>::infinity();
  c.eps0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      if (i == j) continue;
      min_gap = std::min(min_gap, std::abs(p.theta - p.inhibition(i, j)));
      c.eps0 = std::min(c.eps0, p.inhibition(i, j));
    }
  }
  c.alpha = min_gap / 4.0;
  c.f_max = 0.0;
  c.gamma_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.n; ++i) {
    c.f_max = std::max(c.f_max, net.flow().max_rate(i, -p.theta, p.theta));
    c.gamma_min = std::min(c.gamma_min, net.flow().min_decay(i, -p.theta, p.theta));
  }
  c.t0 = c.eps0 / c.f_max;
  c.lambda = std::exp(-c.gamma_min * c.t0);
  c.k_diam = 2.0 * p.theta;
  return c;
}

SpikeOutcome first_spike(const Network& net, std::span<const double> v) {
  if (!below_threshold(net, v)) {
    throw std::domain_error("first_spike: a potential is already at threshold");
  }
  const auto st = spike_times(net, v);
  SpikeOutcome out;
  out.tbar = st.first;
  out.margin = st.second - st.first;
  const double window = st.first * (1.0 + net.tol().simultaneity);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (st.t[i] <= window) out.winners.push_back(static_cast<std::uint32_t>(i));
  }
  out.pre_jump = flow_at(net, v, out.tbar);
  for (auto i : out.winners) out.pre_jump[i] = net.theta();
  return out;
}

ReturnStep return_map(const Network& net, const SectionPoint& v) {
  auto spike = first_spike(net, v.v());
  auto reset = apply_spike(net, spike.pre_jump, spike.winners);
  return ReturnStep{SectionPoint(net, std::move(reset.state)), std::move(spike), reset.clamped};
}

Itinerary itinerary(const Network& net, const SectionPoint& v, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("itinerary: steps must be at least 1");
  Itinerary it;
  SectionPoint cur = v;
  for (std::size_t s = 0; s < steps; ++s) {
    auto step = return_map(net, cur);
    if (step.spike.winners.size() != 1) it.singleton = false;
    it.word.push_back(std::move(step.spike.winners));
    cur = std::move(step.image);
  }
  return it;
}

double time_gap_margin(const Network& net, std::span<const double> v) {
  const auto st = spike_times(net, v);
  return st.second - st.first;
}

Eigen::MatrixXd jacobian(const Network& net, const SectionPoint& v) {
  const auto spike = first_spike(net, v.v());
  if (spike.margin < net.tol().boundary || spike.winners.size() != 1) {
    throw std::domain_error("jacobian: point lies on a tie between spike times");
  }
  const std::size_t n = net.size();
  const std::size_t i = spike.winners.front();
  const auto& flow = net.flow();
  const auto& p = net.params();
  // d tbar / d v_i from differentiating Phi_i^tbar(v_i) = theta.
  const double dt_dvi = -1.0 / flow.rate(i, v[i]);

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    if (spike.pre_jump[j] - p.inhibition(i, j) < -net.theta()) continue;  // clamped
    const auto r = static_cast<Eigen::Index>(j);
    jac(r, r) = flow.sensitivity(j, v[j], spike.tbar);
    jac(r, static_cast<Eigen::Index>(i)) = flow.rate(j, spike.pre_jump[j]) * dt_dvi;
  }
  return jac;
}

Eigen::MatrixXd restrict_to_section(const Eigen::MatrixXd& jac, std::size_t winner,
                                    std::size_t zero_coord) {
  const auto n = jac.rows();
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Eigen::Index r = 0, ro = 0; r < n; ++r) {
    if (r == static_cast<Eigen::Index>(winner)) continue;
    for (Eigen::Index c = 0, co = 0; c < n; ++c) {
      if (c == static_cast<Eigen::Index>(zero_coord)) continue;
      out(ro, co++) = jac(r, c);
    }
    ++ro;
  }
  return out;
}

Eigen::MatrixXd slab_jacobian(const Eigen::MatrixXd& jac, std::size_t zero_coord) {
  Eigen::MatrixXd out = jac;
  out.col(static_cast<Eigen::Index>(zero_coord)).setZero();
  return out;
}

std::optional<TiePoint> locate_tie(const Network& net, std::span<const double> a,
                                   std::span<const double> b, double resolution) {
  const auto wa = first_spike(net, a).winners;
  const auto wb = first_spike(net, b).winners;
  if (wa.size() != 1 || wb.size() != 1 || wa == wb) return std::nullopt;

  State lo(a.begin(), a.end());
  State hi(b.begin(), b.end());
  State mid(lo.size());
  for (int iter = 0; iter < 400 && max_distance(lo, hi) > resolution; ++iter) {
    for (std::size_t k = 0; k < lo.size(); ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
    if (first_spike(net, mid).winners == wa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  TiePoint tie;
  tie.point.resize(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) tie.point[k] = 0.5 * (lo[k] + hi[k]);
  tie.margin = time_gap_margin(net, tie.point);
  tie.left = std::move(lo);
  tie.right = std::move(hi);
  return tie;
}

namespace {

// Coordinates that can move while keeping some other coordinate at zero.
std::vector<std::size_t> free_coordinates(std::span<const double> v,
                                          std::span<const std::size_t> wanted) {
  const auto zs = zero_coordinates(v);
  std::vector<std::size_t> out;
  for (auto c : wanted) {
    const bool keeps_zero =
        std::any_of(zs.begin(), zs.end(), [c](std::uint32_t k) { return k != c; });
    if (keeps_zero) out.push_back(c);
  }
  return out;
}

struct ProbePair {
  State up, down;
  bool valid = false;
};

ProbePair axis_pair(const Network& net, std::span<const double> v, std::size_t c, double r) {
  ProbePair pp;
  pp.up.assign(v.begin(), v.end());
  pp.down.assign(v.begin(), v.end());
  pp.up[c] += r;
  pp.down[c] -= r;
  pp.valid = pp.up[c] < net.theta() && pp.down[c] >= -net.theta();
  return pp;
}

}  // namespace

double discontinuity_jump_probe(const Network& net, std::span<const double> v_near_tie,
                                double delta) {
  const auto st = spike_times(net, v_near_tie);
  const std::size_t pair[] = {st.argmin, st.argsecond};
  const auto coords = free_coordinates(v_near_tie, pair);
  double best = 0.0;
  bool straddled = false;
  for (auto c : coords) {
    for (double r : {delta, 0.5 * delta, 0.25 * delta}) {
      const auto pp = axis_pair(net, v_near_tie, c, r);
      if (!pp.valid) continue;
      const auto su = first_spike(net, pp.up);
      const auto sd = first_spike(net, pp.down);
      if (su.winners == sd.winners) continue;
      straddled = true;
      const auto ru = apply_spike(net, su.pre_jump, su.winners).state;
      const auto rd = apply_spike(net, sd.pre_jump, sd.winners).state;
      best = std::max(best, max_distance(ru, rd));
    }
  }
  if (!straddled) {
    throw std::runtime_error("discontinuity_jump_probe: probes do not straddle a tie");
  }
  return best;
}

double local_jump(const Network& net, std::span<const double> v, double delta) {
  std::vector<std::size_t> all(v.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  const auto coords = free_coordinates(v, all);
  double best = 0.0;
  for (auto c : coords) {
    const auto pp = axis_pair(net, v, c, delta);
    if (!pp.valid) continue;
    best = std::max(best, max_distance(return_state(net, pp.up), return_state(net, pp.down)));
  }
  return best;
}

double norm_equivalence_probe(const Network& net, std::size_t orbits, std::size_t steps,
                              std::uint64_t seed) {
  const auto consts = system_constants(net);
  const std::size_t n = net.size();
  const double theta = net.theta();
  double worst = 1.0;
  for (std::size_t o = 0; o < orbits; ++o) {
    Rng rng(seed, o);
    State v(n);
    for (auto& x : v) x = rng.uniform(-theta, theta);
    v[rng.index(n)] = 0.0;
    SectionPoint cur(net, v);
    cur = return_map(net, cur).image;

    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n));
    prod = slab_jacobian(prod, cur.zero_set().front());
    double scale = 1.0;
    for (std::size_t s = 1; s <= steps; ++s) {
      if (time_gap_margin(net, cur.v()) < net.tol().boundary) break;
      prod = jacobian(net, cur) * prod;
      scale *= consts.lambda;
      const double norm = prod.cwiseAbs().rowwise().sum().maxCoeff();
      worst = std::max(worst, norm / scale);
      cur = return_map(net, cur).image;
    }
  }
  return std::sqrt(worst);
}

std::size_t contraction_iterate(double k, double lambda) {
  const double p0 = std::ceil(std::log(0.5 / (k * k)) / std::log(lambda));
  return p0 < 1.0 ? 1 : static_cast<std::size_t>(p0);
}

}  // namespace netdyn
