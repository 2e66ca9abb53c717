#include "netdyn/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "netdyn/parallel.hpp"

namespace netdyn {

SampleCloud sample_section(const Network& net, std::size_t n_points, std::uint64_t seed) {
  if (n_points == 0) throw std::invalid_argument("sample_section: n_points must be >= 1");
  SampleCloud cloud;
  cloud.points.reserve(n_points);
  std::size_t draws = 0;
  Rng rng(seed, 0x636C6F7564ULL);
  while (cloud.points.size() < n_points) {
    auto v = random_section_state(net, rng);
    ++draws;
    if (time_gap_margin(net, v) > net.tol().boundary) {
      cloud.points.push_back(std::move(v));
    } else {
      ++cloud.resamples;
      if (draws >= 16 && 2 * cloud.resamples > draws) {
        throw NumericalFailure("sample_section: more than half of the draws sit on ties");
      }
    }
  }
  return cloud;
}

AtomRefinery::AtomRefinery(const Network& net, std::vector<State> cloud, std::size_t threads)
    : net_(&net), threads_(threads) {
  samples_.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    samples_[i].state = std::move(cloud[i]);
    prime(samples_[i]);
  }
  words_.assign(1, {});
  survivors_ = samples_.size();
}

void AtomRefinery::prime(Track& t) const {
  const auto spike = first_spike(*net_, t.state);
  t.margin = spike.margin;
  t.next = spike.winners.front();
  if (spike.winners.size() != 1) t.margin = 0.0;
}

void AtomRefinery::advance() {
  const double band = net_->tol().boundary;
  std::vector<std::uint32_t> letter(samples_.size(), 0);
  parallel_for(samples_.size(), threads_, [&](std::size_t i) {
    Track& t = samples_[i];
    if (!t.alive) return;
    if (t.margin < band) {
      t.alive = false;
      return;
    }
    letter[i] = t.next;
    const auto spike = first_spike(*net_, t.state);
    t.state = apply_spike(*net_, spike.pre_jump, spike.winners).state;
    prime(t);
  });

  std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> ids;
  std::vector<std::vector<std::uint32_t>> words;
  survivors_ = 0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    Track& t = samples_[i];
    if (!t.alive) continue;
    ++survivors_;
    const auto key = std::make_pair(t.atom, letter[i]);
    auto [it, inserted] = ids.emplace(key, words.size());
    if (inserted) {
      auto w = words_[t.atom];
      w.push_back(letter[i]);
      words.push_back(std::move(w));
    }
    t.atom = it->second;
  }
  words_ = std::move(words);
  ++generation_;
}

double AtomRefinery::max_diameter() const {
  const std::size_t n = net_->size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(words_.size() * n, inf), hi(words_.size() * n, -inf);
  for (const auto& t : samples_) {
    if (!t.alive) continue;
    for (std::size_t k = 0; k < n; ++k) {
      lo[t.atom * n + k] = std::min(lo[t.atom * n + k], t.state[k]);
      hi[t.atom * n + k] = std::max(hi[t.atom * n + k], t.state[k]);
    }
  }
  double d = 0.0;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    if (hi[a] >= lo[a]) d = std::max(d, hi[a] - lo[a]);
  }
  return d;
}

std::vector<Atom> AtomRefinery::atoms() const {
  const std::size_t n = net_->size();
  std::vector<long> slot(words_.size(), -1);
  std::vector<Atom> out;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Track& t = samples_[i];
    if (!t.alive) continue;
    if (slot[t.atom] < 0) {
      slot[t.atom] = static_cast<long>(out.size());
      Atom a;
      a.word = words_[t.atom];
      a.generation = generation_;
      a.min_margin = std::numeric_limits<double>::infinity();
      out.push_back(std::move(a));
    }
    Atom& a = out[static_cast<std::size_t>(slot[t.atom])];
    a.samples.push_back(i);
    a.members.push_back(t.state);
    a.next_winner.push_back(t.next);
    a.min_margin = std::min(a.min_margin, t.margin);
  }
  for (auto& a : out) {
    // Max-norm diameter is the widest coordinate range.
    for (std::size_t k = 0; k < n; ++k) {
      double lo = a.members.front()[k], hi = lo;
      for (const auto& m : a.members) {
        lo = std::min(lo, m[k]);
        hi = std::max(hi, m[k]);
      }
      a.diameter = std::max(a.diameter, hi - lo);
    }
  }
  return out;
}

AtomGeneration refine_atoms(const Network& net, const std::vector<State>& cloud,
                            std::size_t p_gen) {
  if (p_gen == 0) throw std::invalid_argument("refine_atoms: generation must be >= 1");
  AtomRefinery refinery(net, cloud);
  for (std::size_t p = 0; p < p_gen; ++p) refinery.advance();
  if (refinery.survivors() == 0) {
    throw NumericalFailure("refine_atoms: every sample was discarded at a tie");
  }
  return AtomGeneration{p_gen, refinery.atoms(), refinery.survivors(), refinery.discarded()};
}

std::vector<double> diameter_sequence(const Network& net, const std::vector<State>& cloud,
                                      std::size_t p_max) {
  if (p_max == 0) throw std::invalid_argument("diameter_sequence: p_max must be >= 1");
  AtomRefinery refinery(net, cloud);
  std::vector<double> d;
  d.reserve(p_max);
  for (std::size_t p = 0; p < p_max; ++p) {
    refinery.advance();
    d.push_back(refinery.max_diameter());
  }
  return d;
}

bool indivisibility_check(const Atom& atom, double margin_threshold) {
  if (atom.members.empty()) throw std::invalid_argument("indivisibility_check: empty atom");
  const auto first = atom.next_winner.front();
  const bool one_winner = std::all_of(atom.next_winner.begin(), atom.next_winner.end(),
                                      [first](std::uint32_t w) { return w == first; });
  return one_winner && atom.min_margin > margin_threshold;
}

namespace {

struct Box {
  State lo, hi;
};

Box bounding_box(const Atom& atom) {
  Box b{atom.members.front(), atom.members.front()};
  for (const auto& m : atom.members) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      b.lo[k] = std::min(b.lo[k], m[k]);
      b.hi[k] = std::max(b.hi[k], m[k]);
    }
  }
  return b;
}

double box_gap(std::span<const double> v, const Box& box) {
  double gap = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    gap = std::max({gap, box.lo[k] - v[k], v[k] - box.hi[k]});
  }
  return gap;
}

}  // namespace

ChainReport extract_chains(const Network& net, const std::vector<Atom>& atoms) {
  ChainReport report;
  const std::size_t count = atoms.size();
  if (count == 0) throw NumericalFailure("extract_chains: no atoms");

  std::map<std::vector<std::uint32_t>, std::size_t> by_word;
  for (std::size_t a = 0; a < count; ++a) by_word.emplace(atoms[a].word, a);

  std::vector<Box> boxes;
  boxes.reserve(count);
  for (const auto& atom : atoms) boxes.push_back(bounding_box(atom));

  report.successor.assign(count, 0);
  std::vector<double> gap(count, 0.0);
  for (std::size_t a = 0; a < count; ++a) {
    const Atom& atom = atoms[a];
    std::map<std::uint32_t, std::size_t> votes;
    for (auto w : atom.next_winner) ++votes[w];
    const auto majority = std::max_element(
        votes.begin(), votes.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    const std::size_t strays = atom.members.size() - majority->second;
    if (100 * strays >= atom.members.size() && strays > 0) {
      throw NumericalFailure("extract_chains: atom " + std::to_string(a) +
                             " splits across winners (" + std::to_string(strays) + " of " +
                             std::to_string(atom.members.size()) + " members disagree)");
    }
    if (strays > 0) {
      report.stray_members += strays;
      report.notes.push_back("atom " + std::to_string(a) + ": " + std::to_string(strays) +
                             " stray member(s) outvoted");
    }

    std::vector<State> images;
    images.reserve(atom.members.size());
    for (std::size_t m = 0; m < atom.members.size(); ++m) {
      if (atom.next_winner[m] != majority->first) continue;
      const auto spike = first_spike(net, atom.members[m]);
      images.push_back(apply_spike(net, spike.pre_jump, spike.winners).state);
    }

    std::vector<std::uint32_t> next_word(atom.word.begin() + (atom.word.empty() ? 0 : 1),
                                         atom.word.end());
    next_word.push_back(majority->first);
    std::size_t succ = count;
    if (auto it = by_word.find(next_word); it != by_word.end()) {
      succ = it->second;
    } else {
      // Suffix atom not represented in the cloud: nearest atom to the image centroid.
      State centroid(net.size(), 0.0);
      for (const auto& im : images) {
        for (std::size_t k = 0; k < centroid.size(); ++k) centroid[k] += im[k] / images.size();
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < count; ++b) {
        for (const auto& m : atoms[b].members) {
          const double d = max_distance(centroid, m);
          if (d < best) {
            best = d;
            succ = b;
          }
        }
      }
      report.notes.push_back("atom " + std::to_string(a) +
                             ": suffix word absent, successor chosen by proximity");
    }
    report.successor[a] = succ;
    for (const auto& im : images) gap[a] = std::max(gap[a], box_gap(im, boxes[succ]));
  }

  // Walk the functional graph from every atom.
  std::vector<long> loop_of(count, -1);
  for (std::size_t start = 0; start < count; ++start) {
    AtomChain chain;
    std::vector<long> seen(count, -1);
    std::size_t cur = start;
    while (seen[cur] < 0) {
      seen[cur] = static_cast<long>(chain.path.size());
      chain.path.push_back(cur);
      cur = report.successor[cur];
    }
    chain.entry = static_cast<std::size_t>(seen[cur]);
    chain.loop_length = chain.path.size() - chain.entry;
    chain.path.push_back(cur);

    std::vector<std::size_t> loop(chain.path.begin() + static_cast<long>(chain.entry),
                                  chain.path.end() - 1);
    std::rotate(loop.begin(), std::min_element(loop.begin(), loop.end()), loop.end());
    long id = -1;
    for (std::size_t l = 0; l < report.loops.size(); ++l) {
      if (report.loops[l].atoms == loop) id = static_cast<long>(l);
    }
    if (id < 0) {
      AtomLoop info;
      info.atoms = loop;
      for (auto a : loop) info.inclusion_gap = std::max(info.inclusion_gap, gap[a]);
      id = static_cast<long>(report.loops.size());
      report.loops.push_back(std::move(info));
    }
    ++report.loops[static_cast<std::size_t>(id)].basin_atoms;
    loop_of[start] = id;
    report.chains.push_back(std::move(chain));
  }

  for (const auto& loop : report.loops) {
    const Atom& head = atoms[loop.atoms.front()];
    CycleCandidate cand{loop.atoms.size(), 0, head.members.front()};
    try {
      report.cycles.push_back(canonical_rotation(refine_cycle(net, cand)));
    } catch (const CycleRejected& e) {
      report.notes.push_back(std::string("loop anchored at atom ") +
                             std::to_string(loop.atoms.front()) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace netdyn
