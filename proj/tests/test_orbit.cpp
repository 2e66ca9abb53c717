#include <doctest.h>

#include <cmath>

#include "netdyn/orbit.hpp"
#include "support.hpp"

using namespace netdyn;

namespace {

const Network& sym() {
  static const Network net(support::symmetric2());
  return net;
}

// Neuron 1 is fast enough to always fire first.
NetworkParams fixed_point_params() {
  NetworkParams p = uniform_params(2, 1.0, 1.0, 2.0, 0.2);
  p.gamma = {5.0, 1.0};
  return p;
}

const double kAntiPhase = (3.8 - std::sqrt(8.04)) / 2.0;

}  // namespace

TEST_CASE("orbit at a fixed point is constant") {
  const Network net(fixed_point_params());
  const double e = std::pow(2.0, -0.2);
  const double x = (1.8 - 2.0 * e) / (1.0 - e);
  const auto orbit = iterate_orbit(net, SectionPoint(net, State{0.0, x}), 20);
  REQUIRE(orbit.steps() == 20);
  for (const auto& s : orbit.states) CHECK(max_distance(s, orbit.states.front()) < 1e-14);
  for (double t : orbit.isi) CHECK(t == doctest::Approx(orbit.isi.front()).epsilon(1e-14));
  const auto cand = detect_cycle(orbit, 1e-9);
  REQUIRE(cand.has_value());
  CHECK(cand->period == 1);
  const auto cycle = refine_cycle(net, *cand);
  CHECK(cycle.period == 1);
  CHECK(cycle.states[0][1] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("symmetric orbit alternates and its ISIs settle") {
  const auto orbit = iterate_orbit(sym(), SectionPoint(sym(), State{0.0, 0.5}), 100);
  REQUIRE(orbit.steps() == 100);
  for (std::size_t k = 0; k < 100; ++k) {
    CHECK(orbit.winners[k] == NeuronSet{static_cast<std::uint32_t>(k % 2 == 0 ? 1 : 0)});
  }
  CHECK(std::abs(orbit.isi[99] - orbit.isi[98]) < 1e-6);
  const double t0 = system_constants(sym()).t0;
  for (std::size_t k = 1; k < orbit.isi.size(); ++k) CHECK(orbit.isi[k] >= t0);
  CHECK_FALSE(orbit.hit_boundary);
}

TEST_CASE("detect_cycle") {
  // Exactly periodic: iterate from the analytic anti-phase state.
  OrbitRecord exact;
  exact.states = {State{0, 1}, State{1, 0}, State{0, 1}, State{1, 0}, State{0, 1}};
  exact.winners = {NeuronSet{1}, NeuronSet{0}, NeuronSet{1}, NeuronSet{0}};
  auto c = detect_cycle(exact, 1e-9);
  REQUIRE(c.has_value());
  CHECK(c->period == 2);
  CHECK(c->anchor_index == 2);

  const auto orbit = iterate_orbit(sym(), SectionPoint(sym(), State{0.0, -0.7}), 400);
  c = detect_cycle(orbit, 1e-9);
  REQUIRE(c.has_value());
  CHECK(c->period == 2);

  // An orbit that starts on the tie stops at once: nothing to detect.
  const auto tied = iterate_orbit(sym(), SectionPoint(sym(), State{0.0, 0.0}), 400);
  CHECK(tied.hit_boundary);
  CHECK_FALSE(detect_cycle(tied, 1e-9).has_value());
}

TEST_CASE("refine_cycle") {
  const auto orbit = iterate_orbit(sym(), SectionPoint(sym(), State{0.0, 0.5}), 200);
  const auto cand = detect_cycle(orbit, 1e-9);
  REQUIRE(cand.has_value());
  const auto cycle = canonical_rotation(refine_cycle(sym(), *cand));
  CHECK(cycle.period == 2);
  CHECK(cycle.residual < 1e-12);
  CHECK(cycle.word[0] == NeuronSet{0});
  // After neuron 1 fires, the state is (0, x*).
  CHECK(cycle.states[0][0] == doctest::Approx(kAntiPhase).epsilon(1e-10));
  CHECK(cycle.states[0][1] == 0.0);
  CHECK(cycle.states[1][0] == 0.0);
  CHECK(cycle.floquet_bound < 1.0);
  CHECK(cycle.min_margin > 0.1);

  // Full synchrony: simultaneous winners, exact fixed point.
  const auto sync = refine_cycle(sym(), CycleCandidate{1, 0, State{0.0, 0.0}});
  CHECK(sync.period == 1);
  CHECK(sync.residual == 0.0);
  CHECK(sync.word[0] == NeuronSet{0, 1});

  // A period-4 candidate on the 2-cycle reduces to 2.
  const auto reduced = refine_cycle(sym(), CycleCandidate{4, 0, cycle.states[0]});
  CHECK(reduced.period == 2);
  CHECK(same_cycle(reduced, cycle));
}

TEST_CASE("refinement converges geometrically at rate at most lambda^r") {
  const double lambda = system_constants(sym()).lambda;
  State v{0.0, 0.1};
  std::vector<double> dist;
  for (int lap = 0; lap < 12; ++lap) {
    for (int s = 0; s < 2; ++s) v = return_map(sym(), SectionPoint(sym(), v)).image.v();
    dist.push_back(std::abs(v[1] - kAntiPhase));
  }
  for (std::size_t k = 1; k < dist.size(); ++k) {
    CHECK(dist[k] / dist[k - 1] <= lambda * lambda + 1e-3);
  }
}

TEST_CASE("refine_cycle rejects a candidate that leaves its word") {
  // An anchor next to the tie flips its itinerary on the first lap.
  CHECK_THROWS_AS(refine_cycle(sym(), CycleCandidate{1, 0, State{0.0, 1e-3}}), CycleRejected);
}

TEST_CASE("same_cycle and canonical_rotation") {
  Cycle a;
  a.period = 2;
  a.word = {NeuronSet{1}, NeuronSet{0}};
  a.states = {State{0, 0.4}, State{0.4, 0}};
  const auto b = canonical_rotation(a);
  CHECK(b.word[0] == NeuronSet{0});
  CHECK(same_cycle(a, b));
  auto c = b;
  c.states[0][0] += 1e-6;
  CHECK_FALSE(same_cycle(a, c));
  CHECK(distance_to_cycle(State{0, 0.5}, a) == doctest::Approx(0.1));
}

TEST_CASE("calibrate_margin") {
  const auto calib = calibrate_margin(sym(), 4);
  // On a 1-D slab only directions heading toward the origin meet the tie.
  CHECK(calib.directions > 20);
  CHECK(calib.lipschitz > 0.0);
  CHECK(calib.threshold(0.01) == doctest::Approx(0.01 * calib.lipschitz));
}

TEST_CASE("classify_point examples") {
  const auto opts = classify_options(sym(), calibrate_margin(sym(), 4), 10000);
  CHECK(opts.delta == doctest::Approx(0.02));

  auto v = classify_point(sym(), SectionPoint(sym(), State{0.0, 0.0}), opts);
  CHECK(v.kind == VerdictKind::Chaotic);
  CHECK(v.boundary_contact);

  v = classify_point(sym(), SectionPoint(sym(), State{0.0, 0.5}), opts);
  REQUIRE(v.kind == VerdictKind::Stable);
  CHECK(v.cycle->period == 2);
  CHECK(v.cycle->residual < 1e-12);

  const auto on_cycle = classify_point(sym(), SectionPoint(sym(), v.cycle->states[0]), opts);
  CHECK(on_cycle.kind == VerdictKind::Stable);
  CHECK(on_cycle.convergence_step == 0);
  CHECK(same_cycle(*on_cycle.cycle, *v.cycle));
}

TEST_CASE("classify_system") {
  CHECK(classify_system(1.0, 0.0, 0.0) == SystemClass::AeStable);
  CHECK(classify_system(0.995, 0.0, 0.005) == SystemClass::AeStable);
  CHECK(classify_system(0.0, 1.0, 0.0) == SystemClass::AeChaotic);
  CHECK(classify_system(0.5, 0.5, 0.0) == SystemClass::Combined);
  CHECK(classify_system(0.9, 0.0, 0.1) == SystemClass::Indeterminate);
  CHECK(std::string(to_string(SystemClass::AeStable)) == "ae-stable");
}

TEST_CASE("estimate_measures on the symmetric pair") {
  MeasureOptions o;
  o.samples = 2000;
  o.seed = 12;
  const auto r = estimate_measures(sym(), o);
  CHECK(r.frac_stable >= 0.99);
  CHECK(r.frac_boundary_contact < 0.005);
  CHECK(r.system_class == SystemClass::AeStable);
  REQUIRE(r.cycles.size() == 1);
  CHECK(r.cycles[0].cycle.period == 2);
  CHECK(r.cycles[0].cycle.states[0][0] == doctest::Approx(kAntiPhase).epsilon(1e-9));

  auto single = o;
  single.threads = 1;
  const auto r1 = estimate_measures(sym(), single);
  CHECK(r1.frac_stable == r.frac_stable);
  CHECK(r1.cycle_of == r.cycle_of);
  CHECK_THROWS(estimate_measures(sym(), MeasureOptions{0}));
}
