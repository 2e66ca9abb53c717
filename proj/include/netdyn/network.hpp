#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdyn/flow.hpp"

namespace netdyn {

/// Potentials of all neurons, one entry per neuron, each in [-theta, theta].
using State = std::vector<double>;

/// Sorted set of neuron indices (0-based).
using NeuronSet = std::vector<std::uint32_t>;

struct Tolerances {
  double root = 1e-14;          ///< relative step tolerance of iterative spike-time solves
  double simultaneity = 1e-12;  ///< relative window on spike times counted as a tie
  double recurrence = 1e-9;     ///< state distance accepted as a recurrence
  double boundary = 1e-10;      ///< time-gap margin below which a state counts as a tie
  double genericity = 1e-9;     ///< minimum |h_ij - theta|
};

struct NetworkParams {
  std::size_t n = 0;
  double theta = 1.0;
  std::vector<double> gamma;  ///< leak rates, > 0
  std::vector<double> beta;   ///< drive asymptotes, > theta
  /// Row-major n x n inhibition magnitudes: h[i * n + j] is the drop of
  /// neuron j when neuron i spikes. The diagonal is unused.
  std::vector<double> h;
  Tolerances tol;

  double inhibition(std::size_t from, std::size_t to) const { return h[from * n + to]; }
};

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Returns p unchanged if it describes a valid inhibitory pacemaker network.
/// Throws ParamError naming the first violated condition.
NetworkParams validate_params(NetworkParams p);

/// Symmetric network with identical neurons and uniform inhibition.
NetworkParams uniform_params(std::size_t n, double theta, double gamma, double beta, double h);

/// Validated parameters bound to a flow provider.
class Network {
 public:
  /// Leaky-integrator network built from p.gamma and p.beta.
  explicit Network(NetworkParams p);
  Network(NetworkParams p, std::shared_ptr<const Flow> flow);

  const NetworkParams& params() const { return params_; }
  const Flow& flow() const { return *flow_; }
  std::size_t size() const { return params_.n; }
  double theta() const { return params_.theta; }
  const Tolerances& tol() const { return params_.tol; }

 private:
  NetworkParams params_;
  std::shared_ptr<const Flow> flow_;
};

/// Potentials at time t >= 0 of free evolution from v.
State flow_at(const Network& net, std::span<const double> v, double t);

/// Time for neuron i to reach threshold from potential vi in [-theta, theta).
double spike_time(const Network& net, std::size_t i, double vi);

/// Outcome of the free evolution up to the next spike.
struct SpikeOutcome {
  double tbar = 0.0;   ///< time to the next spike
  NeuronSet winners;   ///< neurons reaching threshold at tbar
  State pre_jump;      ///< potentials at tbar^-; winners exactly at theta
  double margin = 0.0; ///< second-smallest minus smallest per-neuron spike time
};

struct ResetOutcome {
  State state;
  std::size_t clamped = 0;  ///< coordinates lifted back to -theta
};

/// Resets winners to zero and subtracts the summed inhibition from everyone
/// else, clamping at -theta.
ResetOutcome apply_spike(const Network& net, std::span<const double> pre,
                         const NeuronSet& winners);

/// Max-norm distance.
double max_distance(std::span<const double> a, std::span<const double> b);

/// True if every coordinate lies in [-theta, theta].
bool in_cube(const Network& net, std::span<const double> v);

std::string format_set(const NeuronSet& s);  // 1-based, e.g. "{1,3}"

}  // namespace netdyn
