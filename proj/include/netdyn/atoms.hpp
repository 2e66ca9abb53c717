#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdyn/orbit.hpp"

namespace netdyn {

/// Raised when an analysis has nothing left to work with, e.g. every sample
/// of a cloud was discarded at a tie.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampleCloud {
  std::vector<State> points;
  std::size_t resamples = 0;  ///< draws rejected for sitting in the tie band
};

/// Uniform section samples whose margin clears the tie band.
SampleCloud sample_section(const Network& net, std::size_t n_points, std::uint64_t seed);

/// Generation-p image of the samples sharing one length-p itinerary word.
struct Atom {
  std::vector<std::uint32_t> word;       ///< winners i_1..i_p, 0-based
  std::vector<std::size_t> samples;      ///< indices into the cloud
  std::vector<State> members;            ///< p-th images of those samples
  std::vector<std::uint32_t> next_winner;  ///< winner of the step from each member
  double diameter = 0.0;                 ///< max pairwise max-norm distance
  double min_margin = 0.0;               ///< smallest member margin
  std::size_t generation = 0;
};

/// Advances a sample cloud one return-map generation at a time and groups
/// the surviving images by itinerary word. Samples reaching the tie band are
/// discarded.
class AtomRefinery {
 public:
  AtomRefinery(const Network& net, std::vector<State> cloud, std::size_t threads = 1);

  void advance();
  std::size_t generation() const { return generation_; }
  std::size_t survivors() const { return survivors_; }
  std::size_t discarded() const { return samples_.size() - survivors_; }
  std::size_t atom_count() const { return words_.size(); }

  /// Atoms of the current generation ordered by first sample index.
  std::vector<Atom> atoms() const;
  /// Largest atom diameter, without materializing the atoms.
  double max_diameter() const;

 private:
  struct Track {
    State state;
    std::uint32_t next = 0;
    double margin = 0.0;
    bool alive = true;
    std::size_t atom = 0;
  };

  void prime(Track& t) const;

  const Network* net_;
  std::size_t threads_;
  std::vector<Track> samples_;
  std::vector<std::vector<std::uint32_t>> words_;
  std::size_t generation_ = 0;
  std::size_t survivors_ = 0;
};

struct AtomGeneration {
  std::size_t generation = 0;
  std::vector<Atom> atoms;
  std::size_t survivors = 0;
  std::size_t discarded = 0;
};

/// Atoms of generation p_gen. Throws NumericalFailure if no sample survives.
AtomGeneration refine_atoms(const Network& net, const std::vector<State>& cloud,
                            std::size_t p_gen);

/// d_1, ..., d_pmax: the largest atom diameter of each generation.
std::vector<double> diameter_sequence(const Network& net, const std::vector<State>& cloud,
                                      std::size_t p_max);

/// An atom maps whole into one continuity piece when all members share a
/// winner and the members keep a margin above the calibrated threshold.
bool indivisibility_check(const Atom& atom, double margin_threshold);

struct AtomChain {
  std::vector<std::size_t> path;  ///< atom indices, path[k0 + r0] == path[k0]
  std::size_t entry = 0;          ///< k0
  std::size_t loop_length = 0;    ///< r0
};

struct AtomLoop {
  std::vector<std::size_t> atoms;  ///< indices along the loop, starting at the smallest
  double inclusion_gap = 0.0;      ///< worst distance of an image to the next atom's box
  std::size_t basin_atoms = 0;     ///< atoms whose chain enters this loop
};

struct ChainReport {
  std::vector<std::size_t> successor;  ///< atom index -> atom index
  std::vector<AtomChain> chains;       ///< one per atom
  std::vector<AtomLoop> loops;
  std::vector<Cycle> cycles;           ///< refined cycle of each loop
  std::size_t stray_members = 0;       ///< members outvoted by their atom's majority winner
  std::vector<std::string> notes;
};

/// Successor map on a generation of indivisible atoms, the chains it forms,
/// and a refined cycle anchored in each loop. Throws NumericalFailure when an
/// atom's members split across winners beyond the 1% stray allowance.
ChainReport extract_chains(const Network& net, const std::vector<Atom>& atoms);

}  // namespace netdyn
