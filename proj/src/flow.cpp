#include "netdyn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace netdyn {

double Flow::spike_time(std::size_t i, double v, double theta, double tol) const {
  return solve_spike_time(*this, i, v, theta, tol);
}

double Flow::sensitivity(std::size_t i, double v, double t) const {
  return rate(i, evolve(i, v, t)) / rate(i, v);
}

double Flow::max_rate(std::size_t i, double lo, double hi) const {
  constexpr int kGrid = 1000;
  double best = rate(i, lo);
  for (int s = 1; s <= kGrid; ++s) {
    best = std::max(best, rate(i, lo + (hi - lo) * s / kGrid));
  }
  return best;
}

double Flow::min_decay(std::size_t i, double lo, double hi) const {
  constexpr int kGrid = 1000;
  double best = -rate_slope(i, lo);
  for (int s = 1; s <= kGrid; ++s) {
    best = std::min(best, -rate_slope(i, lo + (hi - lo) * s / kGrid));
  }
  return best;
}

double solve_spike_time(const Flow& flow, std::size_t i, double v, double theta, double tol) {
  if (!(v < theta)) {
    throw std::domain_error("spike_time: potential " + std::to_string(v) +
                            " is not below threshold");
  }
  // Bracket [lo, hi] with Phi(lo) < theta <= Phi(hi).
  double lo = 0.0;
  double hi = (theta - v) / flow.rate(i, v);
  while (flow.evolve(i, v, hi) < theta) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw std::runtime_error("spike_time: neuron " + std::to_string(i) +
                               " never reaches threshold");
    }
  }

  double t = lo;
  for (int iter = 0; iter < 200; ++iter) {
    const double phi = flow.evolve(i, v, t);
    const double g = phi - theta;
    if (g < 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
    if (g == 0.0) return t;
    double next = t - g / flow.rate(i, phi);
    if (std::abs(next - t) <= tol * std::max(1.0, t)) {
      return next;
    }
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    t = next;
  }
  return t;
}

LeakyFlow::LeakyFlow(std::vector<double> gamma, std::vector<double> beta)
    : gamma_(std::move(gamma)), beta_(std::move(beta)) {
  if (gamma_.size() != beta_.size()) {
    throw std::invalid_argument("LeakyFlow: gamma and beta differ in length");
  }
}

double LeakyFlow::evolve(std::size_t i, double v, double t) const {
  // beta - (beta - v) e^{-gamma t}, written so t = 0 returns v exactly.
  return v - (beta_[i] - v) * std::expm1(-gamma_[i] * t);
}

double LeakyFlow::rate(std::size_t i, double v) const { return -gamma_[i] * (v - beta_[i]); }

double LeakyFlow::rate_slope(std::size_t i, double) const { return -gamma_[i]; }

double LeakyFlow::spike_time(std::size_t i, double v, double theta, double) const {
  if (!(v < theta)) {
    throw std::domain_error("spike_time: potential " + std::to_string(v) +
                            " is not below threshold");
  }
  // ln((beta - v) / (beta - theta)) = log1p((theta - v) / (beta - theta))
  return std::log1p((theta - v) / (beta_[i] - theta)) / gamma_[i];
}

double LeakyFlow::sensitivity(std::size_t i, double, double t) const {
  return std::exp(-gamma_[i] * t);
}

double LeakyFlow::max_rate(std::size_t i, double lo, double) const { return rate(i, lo); }

double LeakyFlow::min_decay(std::size_t i, double, double) const { return gamma_[i]; }

FieldFlow::FieldFlow(Field rate, Field slope, double max_step)
    : rate_(std::move(rate)), slope_(std::move(slope)), max_step_(max_step) {}

double FieldFlow::evolve(std::size_t i, double v, double t) const {
  if (t <= 0.0) return v;
  const auto steps = static_cast<long>(std::ceil(t / max_step_));
  const double h = t / static_cast<double>(steps);
  for (long s = 0; s < steps; ++s) {
    const double k1 = rate_(i, v);
    const double k2 = rate_(i, v + 0.5 * h * k1);
    const double k3 = rate_(i, v + 0.5 * h * k2);
    const double k4 = rate_(i, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

}  // namespace netdyn
