// Independent oracles and random-system helpers shared by the test binaries.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "netdyn/network.hpp"
#include "netdyn/orbit.hpp"
#include "netdyn/rng.hpp"

namespace oracle {

// Leaky solution written from scratch (no expm1/log1p, unlike the library).
inline double leaky_flow(double gamma, double beta, double v, double t) {
  return beta + (v - beta) * std::exp(-gamma * t);
}

inline double leaky_spike_time(double gamma, double beta, double theta, double v) {
  return std::log((beta - v) / (beta - theta)) / gamma;
}

// Classical RK4 with a fixed step for a scalar autonomous field.
template <class F>
double rk4(const F& f, double v, double t, double h = 1e-5) {
  const auto steps = static_cast<long>(std::ceil(t / h));
  const double dt = steps > 0 ? t / static_cast<double>(steps) : 0.0;
  for (long s = 0; s < steps; ++s) {
    const double k1 = f(v);
    const double k2 = f(v + 0.5 * dt * k1);
    const double k3 = f(v + 0.5 * dt * k2);
    const double k4 = f(v + dt * k3);
    v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

// Threshold crossing by RK4 stepping, refined by bisection on the last step.
template <class F>
double rk4_event(const F& f, double v, double theta, double h = 1e-4) {
  double t = 0.0;
  for (;;) {
    const double next = rk4(f, v, h, h);
    if (next >= theta) {
      double lo = 0.0, hi = h;
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (rk4(f, v, mid, mid) >= theta ? hi : lo) = mid;
      }
      return t + 0.5 * (lo + hi);
    }
    v = next;
    t += h;
  }
}

// Return map of the leaky network evaluated off the section as well (any v
// below threshold), from the closed forms above in extended precision so
// central differences keep ~13 digits. Clamp at -theta included.
inline std::vector<long double> leaky_return(const netdyn::NetworkParams& p,
                                             std::vector<long double> v) {
  std::size_t win = 0;
  long double best = INFINITY;
  for (std::size_t i = 0; i < p.n; ++i) {
    const long double t =
        std::log((p.beta[i] - v[i]) / ((long double)p.beta[i] - p.theta)) / p.gamma[i];
    if (t < best) {
      best = t;
      win = i;
    }
  }
  for (std::size_t j = 0; j < p.n; ++j) {
    if (j == win) {
      v[j] = 0.0L;
      continue;
    }
    const long double phi = p.beta[j] + (v[j] - p.beta[j]) * std::exp(-p.gamma[j] * best);
    v[j] = std::max<long double>(-p.theta, phi - p.h[win * p.n + j]);
  }
  return v;
}

// Central differences of leaky_return at v with step h; column c is d/dv_c.
inline std::vector<std::vector<double>> fd_jacobian(const netdyn::NetworkParams& p,
                                                    const std::vector<double>& v,
                                                    double h = 1e-6) {
  const std::size_t n = v.size();
  std::vector<std::vector<double>> jac(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<long double> up(v.begin(), v.end()), dn(v.begin(), v.end());
    up[c] += h;
    dn[c] -= h;
    const auto fu = leaky_return(p, up), fd = leaky_return(p, dn);
    for (std::size_t r = 0; r < n; ++r) jac[r][c] = static_cast<double>((fu[r] - fd[r]) / (2.0L * h));
  }
  return jac;
}

}  // namespace oracle

namespace support {

// Generic random parameters: gamma in [0.5, 2], beta in [1.2, 3] theta,
// h in [0.05, 0.5] theta.
inline netdyn::NetworkParams random_params(netdyn::Rng& rng, std::size_t n, double theta = 1.0) {
  netdyn::NetworkParams p;
  p.n = n;
  p.theta = theta;
  for (std::size_t i = 0; i < n; ++i) {
    p.gamma.push_back(rng.uniform(0.5, 2.0));
    p.beta.push_back(rng.uniform(1.2, 3.0) * theta);
  }
  p.h.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p.h[i * n + j] = rng.uniform(0.05, 0.5) * theta;
    }
  }
  return netdyn::validate_params(std::move(p));
}

inline netdyn::NetworkParams symmetric2() { return netdyn::uniform_params(2, 1.0, 1.0, 2.0, 0.2); }

// One return-map step from a random section state: a point of rho(B).
inline netdyn::State image_point(const netdyn::Network& net, netdyn::Rng& rng) {
  for (;;) {
    auto v = netdyn::random_section_state(net, rng);
    if (netdyn::time_gap_margin(net, v) <= net.tol().boundary) continue;
    return netdyn::return_map(net, netdyn::SectionPoint(net, v)).image.v();
  }
}

}  // namespace support
