// Module invariants as property tests, each run on three fixed seeds.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "netdyn/atoms.hpp"
#include "support.hpp"

using namespace netdyn;

namespace {

constexpr std::uint64_t kSeeds[] = {11, 22, 33};

Network system_for(std::uint64_t seed) {
  Rng rng(seed, 0xABCD);
  return Network(support::random_params(rng, 3));
}

}  // namespace

// ---- net-model -------------------------------------------------------------

TEST_CASE("flow is increasing, concave, a semigroup, and hits theta at spike_time") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    Rng rng(seed, 1);
    for (int k = 0; k < 200; ++k) {
      const Network net(support::random_params(rng, 3, rng.uniform(0.5, 2.0)));
      const double theta = net.theta();
      State v(3);
      for (auto& x : v) x = rng.uniform(-theta, theta * 0.99);
      double tmax = INFINITY;
      for (std::size_t i = 0; i < 3; ++i) {
        const double ts = spike_time(net, i, v[i]);
        tmax = std::min(tmax, ts);
        CHECK(std::abs(flow_at(net, v, ts)[i] - theta) <= 1e-13 * theta);
      }
      const double t1 = rng.uniform(0.0, tmax), t2 = rng.uniform(t1, tmax);
      const auto a = flow_at(net, v, t1), b = flow_at(net, v, t2);
      for (std::size_t i = 0; i < 3; ++i) {
        if (t2 > t1) CHECK(a[i] < b[i]);
      }
      const double dt = tmax / 20;
      for (int g = 1; g < 20; ++g) {
        const auto m = flow_at(net, v, (g - 1) * dt), c = flow_at(net, v, g * dt),
                   p = flow_at(net, v, (g + 1) * dt);
        for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] - 2 * c[i] + m[i] < 0.0);
      }
      const auto twice = flow_at(net, flow_at(net, v, t1), t2 - t1);
      CHECK(max_distance(twice, b) <= 1e-12);
    }
  }
}

TEST_CASE("apply_spike stays in the cube and zeroes winners") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    Rng rng(seed, 2);
    for (int k = 0; k < 500; ++k) {
      const Network net(support::random_params(rng, 4));
      State pre(4);
      for (auto& x : pre) x = rng.uniform(-1.0, 1.0);
      NeuronSet winners;
      for (std::uint32_t i = 0; i < 4; ++i) {
        if (rng.uniform() < 0.4) winners.push_back(i);
      }
      if (winners.empty()) winners.push_back(static_cast<std::uint32_t>(rng.index(4)));
      for (auto i : winners) pre[i] = net.theta();
      const auto out = apply_spike(net, pre, winners).state;
      CHECK(in_cube(net, out));
      for (auto i : winners) CHECK(out[i] == 0.0);
    }
  }
}

// ---- poincare-map ----------------------------------------------------------

TEST_CASE("piecewise contraction with K_diam") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    const auto c = system_constants(net);
    const auto p0 = contraction_iterate(c.k_diam, c.lambda);
    Rng rng(seed, 3);
    int tested = 0;
    for (int k = 0; k < 300; ++k) {
      State v = support::image_point(net, rng);
      State u = v;
      const double r = std::pow(10.0, rng.uniform(-5.0, -1.0));
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (v[i] != 0.0) u[i] = std::clamp(u[i] + rng.uniform(-r, r), -net.theta(), 0.999);
      }
      const double d0 = max_distance(u, v);
      bool same = d0 > 0;
      for (std::size_t s = 0; s < p0 && same; ++s) {
        const auto sv = first_spike(net, v), su = first_spike(net, u);
        same = sv.winners == su.winners && sv.margin > net.tol().boundary &&
               su.margin > net.tol().boundary;
        if (!same) break;
        v = apply_spike(net, sv.pre_jump, sv.winners).state;
        u = apply_spike(net, su.pre_jump, su.winners).state;
      }
      if (!same) continue;
      ++tested;
      CHECK(max_distance(u, v) <= 0.5 * d0);
    }
    CHECK(tested > 200);
  }
}

TEST_CASE("inter-spike times on rho(B) are at least t0") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    const double t0 = system_constants(net).t0;
    Rng rng(seed, 4);
    for (int k = 0; k < 50; ++k) {
      const auto orbit = iterate_orbit(net, SectionPoint(net, random_section_state(net, rng)), 200);
      for (std::size_t s = 1; s < orbit.isi.size(); ++s) CHECK(orbit.isi[s] >= t0);
    }
  }
}

TEST_CASE("section closure: rho(B_i) lies on the slab of i") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    Rng rng(seed, 5);
    for (int k = 0; k < 1000; ++k) {
      const SectionPoint v(net, random_section_state(net, rng));
      const auto step = return_map(net, v);
      CHECK(in_cube(net, step.image.v()));
      for (auto i : step.spike.winners) CHECK(step.image[i] == 0.0);
    }
  }
}

TEST_CASE("jump dichotomy") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    const double alpha = system_constants(net).alpha;
    Rng rng(seed, 6);
    int ties = 0;
    for (int k = 0; k < 400 && ties < 100; ++k) {
      const auto a = random_section_state(net, rng);
      auto b = a;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (a[i] != 0.0) b[i] = rng.uniform(-net.theta(), net.theta());
      }
      const auto tie = locate_tie(net, a, b);
      if (!tie) continue;
      ++ties;
      CHECK(discontinuity_jump_probe(net, tie->point, 1e-6) > 3 * alpha);
    }
    CHECK(ties >= 50);
    for (int k = 0; k < 50; ++k) {
      const auto v = random_section_state(net, rng);
      if (time_gap_margin(net, v) < 1e-2) continue;
      CHECK(local_jump(net, v, 1e-7) < 1e-5);
    }
  }
}

TEST_CASE("jacobian rows: winner row zero, diagonal in (0, lambda]") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    const double lambda = system_constants(net).lambda;
    Rng rng(seed, 7);
    for (int k = 0; k < 300; ++k) {
      const SectionPoint v(net, support::image_point(net, rng));
      if (time_gap_margin(net, v.v()) < 1e-6) continue;
      const auto jac = jacobian(net, v);
      const auto spike = first_spike(net, v.v());
      const auto i = static_cast<Eigen::Index>(spike.winners.front());
      CHECK(jac.row(i).cwiseAbs().maxCoeff() == 0.0);
      for (Eigen::Index j = 0; j < jac.rows(); ++j) {
        if (j == i || jac.row(j).cwiseAbs().maxCoeff() == 0.0) continue;  // clamped rows
        CHECK(jac(j, j) > 0.0);
        CHECK(jac(j, j) <= lambda);
      }
    }
  }
}

// ---- orbit-dynamics --------------------------------------------------------

TEST_CASE("orbit-level invariants of estimate_measures") {
  int with_cycles = 0;
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    MeasureOptions o;
    o.samples = 400;
    o.seed = seed;
    o.budget = 5000;
    const auto report = estimate_measures(net, o);

    // Worker count never changes results.
    auto serial = o;
    serial.threads = 1;
    auto wide = o;
    wide.threads = 8;
    const auto r1 = estimate_measures(net, serial), r8 = estimate_measures(net, wide);
    CHECK(r1.cycle_of == r8.cycle_of);
    CHECK(r1.frac_stable == r8.frac_stable);

    // Cycle count unchanged when the sample doubles.
    auto doubled = o;
    doubled.samples *= 2;
    const auto bigger = estimate_measures(net, doubled);
    CHECK(bigger.cycles.size() == report.cycles.size());

    // Some draws settle on a cycle that grazes a tie closer than the delta
    // resolution; nothing is then certified stable and the rest is vacuous.
    if (report.cycles.empty()) {
      CHECK(report.frac_stable == 0.0);
      continue;
    }
    ++with_cycles;

    // Cycle validity.
    for (const auto& tally : report.cycles) {
      const auto& c = tally.cycle;
      for (std::size_t k = 0; k < c.period; ++k) {
        const auto image = return_map(net, SectionPoint(net, c.states[k])).image.v();
        CHECK(max_distance(image, c.states[(k + 1) % c.period]) <= 1e-10);
      }
    }

    // Disjoint basins: each stable orbit ends on its own cycle and away from the others.
    for (std::size_t s = 0; s < report.samples; ++s) {
      if (report.cycle_of[s] < 0) continue;
      const auto& v = report.verdicts[s];
      const auto orbit =
          iterate_orbit(net, SectionPoint(net, report.starts[s]), v.convergence_step + 4);
      const auto& end = orbit.states.back();
      for (std::size_t c = 0; c < report.cycles.size(); ++c) {
        const double d = distance_to_cycle(end, report.cycles[c].cycle);
        if (static_cast<long>(c) == report.cycle_of[s]) {
          CHECK(d <= 1e-8);
        } else {
          CHECK(d > 1e-6);
        }
      }
    }

    // Forward invariance and omega-limit consistency.
    int checked = 0;
    for (std::size_t s = 0; s < report.samples && checked < 40; ++s) {
      const auto& v = report.verdicts[s];
      // Slack against the threshold that decides Stable: the floor certificate.
      if (v.kind != VerdictKind::Stable || v.min_margin < 2 * report.options.floor_threshold()) {
        continue;
      }
      ++checked;
      SectionPoint cur(net, report.starts[s]);
      for (int k = 1; k <= 5; ++k) {
        cur = return_map(net, cur).image;
        const auto w = classify_point(net, cur, report.options);
        REQUIRE(w.kind == VerdictKind::Stable);
        CHECK(same_cycle(*w.cycle, *v.cycle));
      }
    }
    CHECK(checked > 0);
    for (std::size_t s = 0; s < r1.samples; ++s) CHECK(r1.verdicts[s].steps == r8.verdicts[s].steps);
  }
  CHECK(with_cycles > 0);
}

// ---- atomizer --------------------------------------------------------------

TEST_CASE("atoms partition the images, nest by suffix, and shrink") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    const auto c = system_constants(net);
    const auto cloud = sample_section(net, 1000, seed).points;
    AtomRefinery refinery(net, cloud);
    std::vector<Atom> previous;
    for (std::size_t p = 1; p <= 12; ++p) {
      refinery.advance();
      const auto atoms = refinery.atoms();

      // Image partition: members are exactly the p-th images of the survivors.
      std::size_t members = 0;
      for (const auto& a : atoms) {
        for (std::size_t m = 0; m < a.members.size(); ++m) {
          ++members;
          State x = cloud[a.samples[m]];
          std::vector<std::uint32_t> word;
          for (std::size_t s = 0; s < p; ++s) {
            const auto spike = first_spike(net, x);
            word.push_back(spike.winners.front());
            x = apply_spike(net, spike.pre_jump, spike.winners).state;
          }
          CHECK(word == a.word);
          CHECK(x == a.members[m]);
        }
      }
      CHECK(members == refinery.survivors());

      // Nesting: A_{i1..i(p)} lies in A_{i2..i(p)} of generation p-1: rho(x) follows
      // the suffix word and its (p-1)-th image is the member itself.
      if (p >= 2) {
        std::map<std::vector<std::uint32_t>, const Atom*> by_word;
        for (const auto& a : previous) by_word[a.word] = &a;
        for (const auto& a : atoms) {
          // Prefix bookkeeping: the samples came from the atom of the word prefix.
          const std::vector<std::uint32_t> prefix(a.word.begin(), a.word.end() - 1);
          REQUIRE(by_word.count(prefix));
          const auto& parent = by_word[prefix]->samples;
          for (auto s : a.samples) CHECK(std::binary_search(parent.begin(), parent.end(), s));
          // Suffix containment, memberwise.
          for (std::size_t m = 0; m < a.members.size(); m += 7) {
            const auto first = first_spike(net, cloud[a.samples[m]]);
            State y = apply_spike(net, first.pre_jump, first.winners).state;
            for (std::size_t s = 1; s < p; ++s) {
              const auto spike = first_spike(net, y);
              CHECK(spike.winners.front() == a.word[s]);
              y = apply_spike(net, spike.pre_jump, spike.winners).state;
            }
            CHECK(y == a.members[m]);
          }
        }
      }

      // Diameter decay bound.
      if (p >= 2) {
        CHECK(refinery.max_diameter() <= c.k_diam * std::pow(c.lambda, p - 1.0) * 1.05);
      }
      previous = atoms;
    }
  }
}

TEST_CASE("atom chains agree with orbit cycles and loops map into themselves") {
  for (auto seed : kSeeds) {
    CAPTURE(seed);
    const Network net = system_for(seed);
    MeasureOptions mo;
    mo.samples = 2000;
    mo.seed = seed;
    const auto measures = estimate_measures(net, mo);
    REQUIRE(measures.frac_stable > 0.0);

    // Refine at a scale every certified orbit supports.
    double delta = measures.options.delta;
    for (const auto& v : measures.verdicts) {
      if (v.kind == VerdictKind::Stable) delta = std::min(delta, v.certified_delta);
    }
    delta *= 0.5;
    const double threshold = 0.5 * measures.options.lipschitz * delta;
    CAPTURE(delta);

    const auto cloud = sample_section(net, 2000, seed).points;
    AtomRefinery refinery(net, cloud);
    bool settled = false;
    for (std::size_t p = 1; p <= 400 && !settled; ++p) {
      refinery.advance();
      if (refinery.max_diameter() >= 0.5 * delta) continue;
      settled = true;
      for (const auto& a : refinery.atoms()) {
        settled = settled && indivisibility_check(a, threshold);
      }
    }
    REQUIRE(settled);
    const auto chains = extract_chains(net, refinery.atoms());
    for (const auto& cyc : chains.cycles) {
      const bool found = std::any_of(measures.cycles.begin(), measures.cycles.end(),
                                     [&](const CycleTally& t) { return same_cycle(t.cycle, cyc, 1e-8); });
      CHECK(found);
    }
    for (const auto& t : measures.cycles) {
      if (t.hits * 100 < mo.samples) continue;
      const bool found = std::any_of(chains.cycles.begin(), chains.cycles.end(),
                                     [&](const Cycle& cyc) { return same_cycle(t.cycle, cyc, 1e-8); });
      CHECK(found);
    }
    for (const auto& loop : chains.loops) CHECK(loop.inclusion_gap <= 0.5 * delta);
  }
}
