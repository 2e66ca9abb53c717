#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "netdyn/poincare.hpp"
#include "netdyn/rng.hpp"

namespace netdyn {

/// Trajectory of the return map. states[k + 1] is the image of states[k];
/// winners, margins and isi are indexed by the step taken from states[k].
struct OrbitRecord {
  State start;
  std::vector<State> states;
  std::vector<NeuronSet> winners;
  std::vector<double> margins;
  std::vector<double> isi;
  std::size_t clamp_events = 0;
  /// The last recorded step had a margin inside the tie band; its image was
  /// not computed.
  bool hit_boundary = false;

  std::size_t steps() const { return winners.size(); }
  Itinerary itinerary() const;
};

/// Iterates up to max_steps times, stopping early at a tie.
OrbitRecord iterate_orbit(const Network& net, const SectionPoint& v, std::size_t max_steps);

/// Continues an orbit in place by up to `more` steps.
void extend_orbit(const Network& net, OrbitRecord& orbit, std::size_t more);

struct CycleCandidate {
  std::size_t period = 0;
  std::size_t anchor_index = 0;
  State anchor;
};

/// Smallest period r (and the latest anchor for it) such that the final
/// state recurs r steps earlier within tol and the two preceding windows of
/// r winner sets agree.
std::optional<CycleCandidate> detect_cycle(const OrbitRecord& orbit, double tol);

struct Cycle {
  std::size_t period = 0;
  std::vector<State> states;
  std::vector<NeuronSet> word;
  double residual = 0.0;       ///< ||rho^r(V*) - V*||
  double floquet_bound = 0.0;  ///< product over the cycle of the largest diagonal derivative
  double min_margin = 0.0;     ///< smallest time-gap margin along the cycle
};

class CycleRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates rho^r from the candidate anchor to a fixed point. Throws
/// CycleRejected if the winner word changes on the way.
Cycle refine_cycle(const Network& net, const CycleCandidate& candidate,
                   std::size_t max_rounds = 10000, double tol = 1e-12);

/// Rotates a cycle so that its word is the lexicographically smallest
/// rotation (ties broken by the states).
Cycle canonical_rotation(Cycle c);

/// True if a and b are the same periodic orbit up to rotation.
bool same_cycle(const Cycle& a, const Cycle& b, double tol = 1e-8);

/// Max-norm distance from v to the nearest state of c.
double distance_to_cycle(std::span<const double> v, const Cycle& c);

/// Relates time-gap margins to max-norm distance from the tie set:
/// margin <= lipschitz * distance.
struct MarginCalibration {
  double lipschitz = 0.0;
  std::size_t directions = 0;  ///< random directions that produced a tie
  /// Margin that guarantees a max-norm distance of at least `distance`.
  double threshold(double distance) const { return lipschitz * distance; }
};

MarginCalibration calibrate_margin(const Network& net, std::uint64_t seed,
                                   std::size_t directions = 100);

enum class VerdictKind { Stable, Chaotic, Undecided };

const char* to_string(VerdictKind k);

struct PointVerdict {
  VerdictKind kind = VerdictKind::Undecided;
  std::optional<Cycle> cycle;  ///< set for Stable
  double min_margin = 0.0;     ///< over the recorded orbit
  std::size_t convergence_step = 0;
  double residual = 0.0;
  std::size_t steps = 0;       ///< return-map iterations spent
  bool boundary_contact = false;
  bool probe_divergence = false;
  /// Largest scale <= delta whose margin certificate holds; 0 unless Stable.
  double certified_delta = 0.0;
};

/// Stability is existential in the perturbation scale: a converged orbit is
/// Stable when its post-transient margin certifies some scale in
/// [delta_floor, delta]. Probes for chaos always use the full delta.
struct ClassifyOptions {
  std::size_t budget = 10000;
  double delta = 0.0;             ///< perturbation scale, below alpha
  double margin_threshold = 0.0;  ///< calibrated margin for distance delta / 2
  double delta_floor = 0.0;       ///< smallest certifiable scale
  double lipschitz = 0.0;         ///< margin per unit distance, from the calibration
  std::size_t probe_steps = 200;
  double alpha = 0.0;

  double floor_threshold() const { return 0.5 * lipschitz * delta_floor; }
};

/// Builds options for a network: alpha from the constants, the margin
/// threshold from a calibration, delta = delta_fraction * alpha and
/// delta_floor = floor_fraction * alpha.
ClassifyOptions classify_options(const Network& net, const MarginCalibration& calib,
                                 std::size_t budget, double delta_fraction = 0.1,
                                 double floor_fraction = 1e-6);

PointVerdict classify_point(const Network& net, const SectionPoint& v,
                            const ClassifyOptions& opts);

enum class SystemClass { AeStable, AeChaotic, Combined, Indeterminate };

const char* to_string(SystemClass c);

struct CycleTally {
  Cycle cycle;
  std::size_t hits = 0;
};

struct MeasureOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t budget = 10000;
  double delta_fraction = 0.1;
  std::size_t threads = 0;  ///< 0 reads NETDYN_THREADS, defaulting to hardware concurrency
};

struct MeasureReport {
  std::size_t samples = 0;
  double frac_stable = 0.0;
  double frac_chaotic = 0.0;
  double frac_undecided = 0.0;
  double frac_boundary_contact = 0.0;
  std::vector<CycleTally> cycles;
  SystemClass system_class = SystemClass::Indeterminate;

  std::vector<State> starts;
  std::vector<PointVerdict> verdicts;
  /// Index into cycles for each Stable verdict, -1 otherwise.
  std::vector<long> cycle_of;
  ClassifyOptions options;
};

/// Uniform draw on the section: a slab chosen uniformly, the other
/// coordinates uniform in [-theta, theta).
State random_section_state(const Network& net, Rng& rng);

MeasureReport estimate_measures(const Network& net, const MeasureOptions& opts);

SystemClass classify_system(double frac_stable, double frac_chaotic, double frac_undecided);

}  // namespace netdyn
