#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netdyn/network.hpp"

namespace netdyn {

/// A state on the post-spike section: at least one potential is exactly zero.
class SectionPoint {
 public:
  /// Throws std::invalid_argument if v has no zero coordinate or leaves the cube.
  SectionPoint(const Network& net, State v);

  const State& v() const { return v_; }
  const NeuronSet& zero_set() const { return zero_set_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }

 private:
  State v_;
  NeuronSet zero_set_;
};

NeuronSet zero_coordinates(std::span<const double> v);

struct Itinerary {
  std::vector<NeuronSet> word;
  bool singleton = true;  ///< every entry has exactly one neuron
};

struct SystemConstants {
  double alpha = 0.0;      ///< expansivity constant, min |theta - h_ij| / 4
  double eps0 = 0.0;       ///< min h_ij
  double t0 = 0.0;         ///< lower bound of inter-spike times on the image of the map
  double lambda = 0.0;     ///< contraction rate exp(-gamma_min t0)
  double gamma_min = 0.0;  ///< min over neurons and the cube of -dF_i/dV_i
  double f_max = 0.0;      ///< max over neurons and the cube of F_i
  double k_diam = 0.0;     ///< max-norm diameter of the section, 2 theta
};

SystemConstants system_constants(const Network& net);

/// Free evolution from v up to the next spike. Requires every v_i < theta.
SpikeOutcome first_spike(const Network& net, std::span<const double> v);

struct ReturnStep {
  SectionPoint image;
  SpikeOutcome spike;
  std::size_t clamped = 0;
};

/// One application of the first-return map.
ReturnStep return_map(const Network& net, const SectionPoint& v);

/// Winner sets of the first `steps` iterates.
Itinerary itinerary(const Network& net, const SectionPoint& v, std::size_t steps);

/// Gap between the two smallest per-neuron spike times. Zero exactly where
/// two neurons tie for the next spike.
double time_gap_margin(const Network& net, std::span<const double> v);

/// Analytic derivative of the return map at a point with a single winner,
/// rows indexed by output coordinate. The winner row is zero, as is any row
/// whose coordinate is held at -theta by the clamp. Throws std::domain_error
/// if the point is within the boundary tolerance of a tie.
Eigen::MatrixXd jacobian(const Network& net, const SectionPoint& v);

/// Restriction of a full Jacobian to section charts: the output lies on the
/// slab of `winner`, the input on the slab of `zero_coord`, so drop that row
/// and that column.
Eigen::MatrixXd restrict_to_section(const Eigen::MatrixXd& jac, std::size_t winner,
                                    std::size_t zero_coord);

/// Jacobian acting on tangent vectors of the slab {v_k = 0}: column k zeroed.
Eigen::MatrixXd slab_jacobian(const Eigen::MatrixXd& jac, std::size_t zero_coord);

/// A point located on (numerically) the discontinuity set, together with a
/// straddling pair of nearby section points whose winners differ.
struct TiePoint {
  State point;
  State left;   ///< winner matches the first segment endpoint
  State right;  ///< winner differs
  double margin = 0.0;
};

/// Bisects the segment [a, b] for a change of winner. Both endpoints must lie
/// on a common slab and have different single winners. Stops when the
/// bracket is shorter than `resolution` in the max norm.
std::optional<TiePoint> locate_tie(const Network& net, std::span<const double> a,
                                   std::span<const double> b, double resolution = 1e-15);

/// Largest max-norm jump of the return map across a near-tie point, over
/// coordinate probes at radii delta, delta/2, delta/4. Throws
/// std::runtime_error if no probe pair lands on two different winners.
double discontinuity_jump_probe(const Network& net, std::span<const double> v_near_tie,
                                double delta);

/// Same probes as discontinuity_jump_probe but without requiring a change of
/// winner; tends to zero inside a continuity piece as delta -> 0.
double local_jump(const Network& net, std::span<const double> v, double delta);

/// Estimates the constant K with ||D rho^p|| <= K^2 lambda^p in the max norm,
/// from products of slab Jacobians along `orbits` random orbits of `steps`
/// iterates started on the image of the map.
double norm_equivalence_probe(const Network& net, std::size_t orbits, std::size_t steps,
                              std::uint64_t seed);

/// Smallest iterate p0 with K^2 lambda^p0 <= 1/2.
std::size_t contraction_iterate(double k, double lambda);

}  // namespace netdyn
