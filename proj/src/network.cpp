#include "netdyn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netdyn {

namespace {

void check_topology(const NetworkParams& p) {
  if (p.n < 2) {
    throw ParamError("n must be at least 2 (got " + std::to_string(p.n) + ")");
  }
  if (!(p.theta > 0.0) || !std::isfinite(p.theta)) {
    throw ParamError("theta must be positive");
  }
  if (p.h.size() != p.n * p.n) {
    throw ParamError("h must have n*n = " + std::to_string(p.n * p.n) + " entries (got " +
                     std::to_string(p.h.size()) + ")");
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      if (i == j) continue;
      const double hij = p.inhibition(i, j);
      const auto where = "h[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
      if (!(hij > 0.0) || !std::isfinite(hij)) {
        throw ParamError(where + " must be positive (got " + std::to_string(hij) + ")");
      }
      if (std::abs(hij - p.theta) < p.tol.genericity) {
        throw ParamError(where + ": h equals theta (expansivity constant would vanish)");
      }
    }
  }
}

}  // namespace

NetworkParams validate_params(NetworkParams p) {
  check_topology(p);
  if (p.gamma.size() != p.n) {
    throw ParamError("gamma must have n = " + std::to_string(p.n) + " entries (got " +
                     std::to_string(p.gamma.size()) + ")");
  }
  if (p.beta.size() != p.n) {
    throw ParamError("beta must have n = " + std::to_string(p.n) + " entries (got " +
                     std::to_string(p.beta.size()) + ")");
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    if (!(p.gamma[i] > 0.0) || !std::isfinite(p.gamma[i])) {
      throw ParamError("gamma[" + std::to_string(i + 1) + "] must be positive");
    }
    if (!(p.beta[i] > p.theta) || !std::isfinite(p.beta[i])) {
      throw ParamError("beta must exceed theta (beta[" + std::to_string(i + 1) +
                       "] = " + std::to_string(p.beta[i]) + ")");
    }
  }
  return p;
}

NetworkParams uniform_params(std::size_t n, double theta, double gamma, double beta, double h) {
  NetworkParams p;
  p.n = n;
  p.theta = theta;
  p.gamma.assign(n, gamma);
  p.beta.assign(n, beta);
  p.h.assign(n * n, h);
  for (std::size_t i = 0; i < n; ++i) p.h[i * n + i] = 0.0;
  return p;
}

Network::Network(NetworkParams p)
    : params_(validate_params(std::move(p))),
      flow_(std::make_shared<LeakyFlow>(params_.gamma, params_.beta)) {}

Network::Network(NetworkParams p, std::shared_ptr<const Flow> flow)
    : params_(std::move(p)), flow_(std::move(flow)) {
  check_topology(params_);
  if (!flow_) throw ParamError("flow provider is null");
  const double lo = -params_.theta;
  const double hi = params_.theta;
  for (std::size_t i = 0; i < params_.n; ++i) {
    double fmin = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= 1000; ++s) {
      fmin = std::min(fmin, flow_->rate(i, lo + (hi - lo) * s / 1000.0));
    }
    if (!(fmin > 0.0)) {
      throw ParamError("flow: F_" + std::to_string(i + 1) + " must be positive on the cube");
    }
    if (!(flow_->min_decay(i, lo, hi) > 0.0)) {
      throw ParamError("flow: dF_" + std::to_string(i + 1) + "/dV must be negative on the cube");
    }
  }
}

State flow_at(const Network& net, std::span<const double> v, double t) {
  if (!(t >= 0.0)) throw std::domain_error("flow_at: negative time");
  State out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = net.flow().evolve(i, v[i], t);
  return out;
}

double spike_time(const Network& net, std::size_t i, double vi) {
  if (vi < -net.theta() || !std::isfinite(vi)) {
    throw std::domain_error("spike_time: potential below -theta");
  }
  return net.flow().spike_time(i, vi, net.theta(), net.tol().root);
}

ResetOutcome apply_spike(const Network& net, std::span<const double> pre,
                         const NeuronSet& winners) {
  if (winners.empty()) throw std::invalid_argument("apply_spike: empty winner set");
  const double theta = net.theta();
  const double slack = 1e-9 * theta;
  ResetOutcome out;
  out.state.assign(pre.begin(), pre.end());
  std::vector<bool> fired(pre.size(), false);
  for (auto i : winners) {
    if (std::abs(pre[i] - theta) > slack) {
      throw std::invalid_argument("apply_spike: winner " + std::to_string(i + 1) +
                                  " is not at threshold");
    }
    fired[i] = true;
  }
  const auto& p = net.params();
  for (std::size_t j = 0; j < pre.size(); ++j) {
    if (fired[j]) {
      out.state[j] = 0.0;
      continue;
    }
    double w = pre[j];
    for (auto i : winners) w -= p.inhibition(i, j);
    if (w < -theta) {
      w = -theta;
      ++out.clamped;
    }
    out.state[j] = w;
  }
  return out;
}

double max_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

bool in_cube(const Network& net, std::span<const double> v) {
  const double theta = net.theta();
  return std::all_of(v.begin(), v.end(), [&](double x) { return x >= -theta && x <= theta; });
}

std::string format_set(const NeuronSet& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(s[k] + 1);
  }
  return out + "}";
}

}  // namespace netdyn
