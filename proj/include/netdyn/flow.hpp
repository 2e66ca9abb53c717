#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace netdyn {

/// Inter-spike dynamics of a network of uncoupled pacemakers.
///
/// Each neuron i follows dV_i/dt = F_i(V_i) between spikes, with F_i > 0 and
/// dF_i/dV_i < 0 on [-theta, theta], both bounded away from zero. Providers
/// supply the flow, the vector field and its slope; everything else
/// (spike times, sensitivities, bounds) has a generic fallback.
class Flow {
 public:
  virtual ~Flow() = default;

  /// Phi_i^t(v): potential of neuron i after free evolution for time t.
  virtual double evolve(std::size_t i, double v, double t) const = 0;
  /// F_i(v).
  virtual double rate(std::size_t i, double v) const = 0;
  /// dF_i/dV_i at v.
  virtual double rate_slope(std::size_t i, double v) const = 0;

  /// Time for neuron i to climb from v to theta. Requires v < theta.
  /// The default solves Phi_i^t(v) = theta by safeguarded Newton.
  virtual double spike_time(std::size_t i, double v, double theta, double tol) const;

  /// d Phi_i^t(v) / dv. For a scalar autonomous field this is F(Phi^t(v)) / F(v).
  virtual double sensitivity(std::size_t i, double v, double t) const;

  /// max of F_i over [lo, hi].
  virtual double max_rate(std::size_t i, double lo, double hi) const;
  /// min of -dF_i/dV_i over [lo, hi].
  virtual double min_decay(std::size_t i, double lo, double hi) const;
};

/// Safeguarded Newton/bisection for Phi_i^t(v) = theta. Newton on a concave
/// increasing function started left of the root is monotone; the bracket only
/// matters for badly scaled providers.
double solve_spike_time(const Flow& flow, std::size_t i, double v, double theta, double tol);

/// Leaky integrator F_i(V) = -gamma_i (V - beta_i).
class LeakyFlow final : public Flow {
 public:
  LeakyFlow(std::vector<double> gamma, std::vector<double> beta);

  double evolve(std::size_t i, double v, double t) const override;
  double rate(std::size_t i, double v) const override;
  double rate_slope(std::size_t i, double v) const override;
  double spike_time(std::size_t i, double v, double theta, double tol) const override;
  double sensitivity(std::size_t i, double v, double t) const override;
  double max_rate(std::size_t i, double lo, double hi) const override;
  double min_decay(std::size_t i, double lo, double hi) const override;

  const std::vector<double>& gamma() const { return gamma_; }
  const std::vector<double>& beta() const { return beta_; }

 private:
  std::vector<double> gamma_;
  std::vector<double> beta_;
};

/// Flow given only by its vector field; Phi^t is obtained by fixed-step RK4
/// (steps no longer than max_step). Slower than a closed form, intended for
/// C^1 fields without one.
class FieldFlow final : public Flow {
 public:
  using Field = std::function<double(std::size_t, double)>;

  FieldFlow(Field rate, Field slope, double max_step = 1e-2);

  double evolve(std::size_t i, double v, double t) const override;
  double rate(std::size_t i, double v) const override { return rate_(i, v); }
  double rate_slope(std::size_t i, double v) const override { return slope_(i, v); }

 private:
  Field rate_;
  Field slope_;
  double max_step_;
};

}  // namespace netdyn
