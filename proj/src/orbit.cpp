#include "netdyn/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netdyn {

Itinerary OrbitRecord::itinerary() const {
  Itinerary it;
  it.word = winners;
  it.singleton = std::all_of(winners.begin(), winners.end(),
                             [](const NeuronSet& s) { return s.size() == 1; });
  return it;
}

void extend_orbit(const Network& net, OrbitRecord& orbit, std::size_t more) {
  if (orbit.states.empty()) orbit.states.push_back(orbit.start);
  for (std::size_t s = 0; s < more && !orbit.hit_boundary; ++s) {
    const State& cur = orbit.states.back();
    auto spike = first_spike(net, cur);
    orbit.winners.push_back(spike.winners);
    orbit.margins.push_back(spike.margin);
    orbit.isi.push_back(spike.tbar);
    if (spike.margin < net.tol().boundary) {
      orbit.hit_boundary = true;
      break;
    }
    auto reset = apply_spike(net, spike.pre_jump, spike.winners);
    orbit.clamp_events += reset.clamped;
    orbit.states.push_back(std::move(reset.state));
  }
}

OrbitRecord iterate_orbit(const Network& net, const SectionPoint& v, std::size_t max_steps) {
  OrbitRecord orbit;
  orbit.start = v.v();
  orbit.states.push_back(v.v());
  extend_orbit(net, orbit, max_steps);
  return orbit;
}

std::optional<CycleCandidate> detect_cycle(const OrbitRecord& orbit, double tol) {
  if (orbit.states.size() < 3) return std::nullopt;
  const std::size_t last = orbit.states.size() - 1;
  const State& tail = orbit.states[last];
  for (std::size_t r = 1; 2 * r <= last; ++r) {
    if (max_distance(tail, orbit.states[last - r]) > tol) continue;
    bool words_match = true;
    for (std::size_t s = 0; s < r && words_match; ++s) {
      words_match = orbit.winners[last - r + s] == orbit.winners[last - 2 * r + s];
    }
    if (!words_match) continue;
    return CycleCandidate{r, last - r, orbit.states[last - r]};
  }
  return std::nullopt;
}

namespace {

struct Lap {
  State end;
  std::vector<NeuronSet> word;
  std::vector<State> states;
  std::vector<SpikeOutcome> spikes;
};

Lap run_lap(const Network& net, const State& from, std::size_t r, bool keep) {
  Lap lap;
  State cur = from;
  for (std::size_t s = 0; s < r; ++s) {
    auto spike = first_spike(net, cur);
    auto next = apply_spike(net, spike.pre_jump, spike.winners).state;
    lap.word.push_back(spike.winners);
    if (keep) {
      lap.states.push_back(cur);
      lap.spikes.push_back(std::move(spike));
    }
    cur = std::move(next);
  }
  lap.end = std::move(cur);
  return lap;
}

}  // namespace

Cycle refine_cycle(const Network& net, const CycleCandidate& candidate, std::size_t max_rounds,
                   double tol) {
  const std::size_t r = candidate.period;
  if (r == 0) throw std::invalid_argument("refine_cycle: period must be positive");
  State v = candidate.anchor;
  const auto reference = run_lap(net, v, r, false).word;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t round = 0; round < max_rounds; ++round) {
    auto lap = run_lap(net, v, r, false);
    if (lap.word != reference) {
      throw CycleRejected("refine_cycle: itinerary changed during refinement");
    }
    const double step = max_distance(lap.end, v);
    // Past tol, keep going while laps still shrink: that reaches the rounding floor.
    if (step < tol && step >= previous) break;
    v = std::move(lap.end);
    if (step == 0.0) break;
    previous = step;
  }

  auto lap = run_lap(net, v, r, true);
  if (lap.word != reference) {
    throw CycleRejected("refine_cycle: itinerary changed during refinement");
  }
  Cycle c;
  c.period = r;
  c.residual = max_distance(lap.end, v);
  c.word = std::move(lap.word);
  c.states = std::move(lap.states);

  // Minimal period: a proper divisor d whose word repeats and whose state recurs.
  for (std::size_t d = 1; d < r; ++d) {
    if (r % d != 0) continue;
    bool periodic = max_distance(c.states[d], c.states[0]) <= net.tol().recurrence;
    for (std::size_t s = 0; s + d < r && periodic; ++s) periodic = c.word[s] == c.word[s + d];
    if (periodic) {
      c.period = d;
      c.states.resize(d);
      c.word.resize(d);
      lap.spikes.resize(d);
      c.residual = max_distance(run_lap(net, c.states[0], d, false).end, c.states[0]);
      break;
    }
  }

  c.floquet_bound = 1.0;
  c.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < c.period; ++s) {
    const auto& spike = lap.spikes[s];
    double worst = 0.0;
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (std::find(spike.winners.begin(), spike.winners.end(), j) != spike.winners.end()) {
        continue;
      }
      worst = std::max(worst, net.flow().sensitivity(j, c.states[s][j], spike.tbar));
    }
    c.floquet_bound *= worst;
    c.min_margin = std::min(c.min_margin, spike.margin);
  }
  return c;
}

Cycle canonical_rotation(Cycle c) {
  const std::size_t r = c.period;
  std::size_t best = 0;
  auto less_rotation = [&](std::size_t a, std::size_t b) {
    for (std::size_t s = 0; s < r; ++s) {
      const auto& wa = c.word[(a + s) % r];
      const auto& wb = c.word[(b + s) % r];
      if (wa != wb) return wa < wb;
    }
    return c.states[a] < c.states[b];
  };
  for (std::size_t s = 1; s < r; ++s) {
    if (less_rotation(s, best)) best = s;
  }
  std::rotate(c.states.begin(), c.states.begin() + static_cast<long>(best), c.states.end());
  std::rotate(c.word.begin(), c.word.begin() + static_cast<long>(best), c.word.end());
  return c;
}

bool same_cycle(const Cycle& a, const Cycle& b, double tol) {
  if (a.period != b.period) return false;
  const std::size_t r = a.period;
  for (std::size_t shift = 0; shift < r; ++shift) {
    bool match = true;
    for (std::size_t s = 0; s < r && match; ++s) {
      match = a.word[s] == b.word[(s + shift) % r] &&
              max_distance(a.states[s], b.states[(s + shift) % r]) <= tol;
    }
    if (match) return true;
  }
  return false;
}

double distance_to_cycle(std::span<const double> v, const Cycle& c) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : c.states) best = std::min(best, max_distance(v, s));
  return best;
}

State random_section_state(const Network& net, Rng& rng) {
  const std::size_t n = net.size();
  const double theta = net.theta();
  State v(n);
  const std::size_t k = rng.index(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-theta, theta);
  v[k] = 0.0;
  return v;
}

MarginCalibration calibrate_margin(const Network& net, std::uint64_t seed,
                                   std::size_t directions) {
  const std::size_t n = net.size();
  const double theta = net.theta();
  MarginCalibration calib;
  for (std::size_t d = 0; d < directions; ++d) {
    Rng rng(seed ^ 0x6D617267696EULL, d);
    const State v = random_section_state(net, rng);
    const std::size_t k = zero_coordinates(v).front();
    State u(n, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      u[i] = rng.uniform(-1.0, 1.0);
      norm = std::max(norm, std::abs(u[i]));
    }
    if (norm == 0.0) continue;
    for (auto& x : u) x /= norm;

    const auto s0 = first_spike(net, v);
    if (s0.winners.size() != 1) continue;

    // Largest step that keeps v + s u inside [-theta, theta).
    double reach = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] > 0) reach = std::min(reach, (theta - v[i]) / u[i]);
      if (u[i] < 0) reach = std::min(reach, (-theta - v[i]) / u[i]);
    }
    reach *= 1.0 - 1e-12;
    constexpr int kMarch = 64;
    State prev = v;
    for (int m = 1; m <= kMarch; ++m) {
      State w(n);
      const double s = reach * m / kMarch;
      for (std::size_t i = 0; i < n; ++i) w[i] = i == k ? 0.0 : v[i] + s * u[i];
      if (first_spike(net, w).winners != s0.winners) {
        if (auto tie = locate_tie(net, prev, w)) {
          const double dist = max_distance(v, tie->point);
          if (dist > 0.0) {
            calib.lipschitz = std::max(calib.lipschitz, s0.margin / dist);
            ++calib.directions;
          }
        }
        break;
      }
      prev = std::move(w);
    }
  }
  if (calib.directions == 0) {
    // Gradient bound of t_a - t_b: |dt_i/dv_i| = 1 / F_i(v_i) <= 1 / min F_i.
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, 1.0 / std::min(net.flow().rate(i, theta),
                                               net.flow().rate(i, -theta)));
    }
    calib.lipschitz = 2.0 * worst;
  }
  return calib;
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Stable: return "stable";
    case VerdictKind::Chaotic: return "chaotic";
    case VerdictKind::Undecided: return "undecided";
  }
  return "?";
}

ClassifyOptions classify_options(const Network& net, const MarginCalibration& calib,
                                 std::size_t budget, double delta_fraction,
                                 double floor_fraction) {
  ClassifyOptions o;
  o.budget = budget;
  o.alpha = system_constants(net).alpha;
  o.delta = delta_fraction * o.alpha;
  o.delta_floor = std::min(floor_fraction * o.alpha, o.delta);
  o.lipschitz = calib.lipschitz;
  o.margin_threshold = calib.threshold(0.5 * o.delta);
  // The floor must stay clear of the tie band, or "certified" means nothing.
  if (!(o.lipschitz > 0.0)) throw std::runtime_error("margin calibration found no ties");
  if (o.floor_threshold() < 100.0 * net.tol().boundary) {
    o.delta_floor = std::min(o.delta, 200.0 * net.tol().boundary / o.lipschitz);
  }
  return o;
}

namespace {

// Axis perturbations of size delta at `base`; true if any perturbed orbit
// separates from the base orbit by more than alpha.
bool probes_diverge(const Network& net, const State& base, const ClassifyOptions& opts) {
  const std::size_t n = net.size();
  const auto zs = zero_coordinates(base);
  const std::size_t k = zs.empty() ? n : zs.front();
  const std::size_t horizon = std::min(opts.budget, opts.probe_steps);

  std::vector<State> ref;
  ref.reserve(horizon);
  State cur = base;
  for (std::size_t s = 0; s < horizon; ++s) {
    auto spike = first_spike(net, cur);
    cur = apply_spike(net, spike.pre_jump, spike.winners).state;
    ref.push_back(cur);
  }
  for (std::size_t m = 0; m < n; ++m) {
    if (m == k) continue;
    for (double sign : {1.0, -1.0}) {
      State w = base;
      w[m] += sign * opts.delta;
      if (!(w[m] < net.theta()) || w[m] < -net.theta()) continue;
      for (std::size_t s = 0; s < horizon; ++s) {
        auto spike = first_spike(net, w);
        w = apply_spike(net, spike.pre_jump, spike.winners).state;
        if (max_distance(w, ref[s]) > opts.alpha) return true;
      }
    }
  }
  return false;
}

}  // namespace

PointVerdict classify_point(const Network& net, const SectionPoint& v,
                            const ClassifyOptions& opts) {
  PointVerdict verdict;
  OrbitRecord orbit;
  orbit.start = v.v();
  orbit.states.push_back(v.v());

  auto finish_orbit_stats = [&] {
    verdict.steps = orbit.steps();
    verdict.min_margin = orbit.margins.empty()
                             ? time_gap_margin(net, v.v())
                             : *std::min_element(orbit.margins.begin(), orbit.margins.end());
  };

  std::size_t next_check = 8;
  while (orbit.steps() < opts.budget) {
    extend_orbit(net, orbit, std::min(next_check, opts.budget) - orbit.steps());
    if (orbit.hit_boundary) {
      finish_orbit_stats();
      verdict.kind = VerdictKind::Chaotic;
      verdict.boundary_contact = true;
      verdict.convergence_step = orbit.steps();
      return verdict;
    }
    next_check = orbit.steps() + std::max<std::size_t>(8, orbit.steps() / 4);

    auto candidate = detect_cycle(orbit, net.tol().recurrence);
    if (!candidate) continue;
    Cycle cycle;
    try {
      cycle = refine_cycle(net, *candidate);
    } catch (const CycleRejected&) {
      continue;
    }
    finish_orbit_stats();
    std::size_t conv = 0;
    while (conv < orbit.states.size() &&
           distance_to_cycle(orbit.states[conv], cycle) > net.tol().recurrence) {
      ++conv;
    }
    double post_margin = cycle.min_margin;
    for (std::size_t s = conv; s < orbit.margins.size(); ++s) {
      post_margin = std::min(post_margin, orbit.margins[s]);
    }
    verdict.convergence_step = conv;
    verdict.residual = cycle.residual;
    if (post_margin >= opts.floor_threshold()) {
      verdict.kind = VerdictKind::Stable;
      verdict.certified_delta = std::min(opts.delta, 2.0 * post_margin / opts.lipschitz);
      verdict.cycle = canonical_rotation(std::move(cycle));
      return verdict;
    }
    verdict.probe_divergence = probes_diverge(net, cycle.states.front(), opts);
    verdict.kind = verdict.probe_divergence ? VerdictKind::Chaotic : VerdictKind::Undecided;
    return verdict;
  }

  finish_orbit_stats();
  verdict.convergence_step = orbit.steps();
  verdict.probe_divergence = probes_diverge(net, orbit.states.back(), opts);
  verdict.kind = verdict.probe_divergence ? VerdictKind::Chaotic : VerdictKind::Undecided;
  return verdict;
}

}  // namespace netdyn
