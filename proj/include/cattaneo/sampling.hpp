#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cattaneo/symbol.hpp"

namespace cattaneo {

using Rng = std::mt19937_64;

/// Uniform point on the unit sphere (normalized Gaussian triple).
inline Vec3 random_unit_vector(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 x(g(rng), g(rng), g(rng));
    const double n = x.norm();
    if (n > 1e-8) return x / n;
  }
}

inline std::vector<Vec3> random_unit_vectors(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(random_unit_vector(rng));
  return out;
}

/// Ranges for randomly drawn states.
struct StateSampler {
  double rho0 = 0.5, rho1 = 2.0;
  double theta0 = 0.5, theta1 = 2.0;
  double v_max = 1.0;  // |v_i| <= v_max
  double q_max = 1.0;  // |q_i| <= q_max
  double q_min = 0.0;  // |q_i| >= q_min when positive (keeps q_i away from 0)
};

inline double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline FluidState random_state(Rng& rng, const StateSampler& s) {
  FluidState u;
  u.rho = uniform(rng, s.rho0, s.rho1);
  u.theta = uniform(rng, s.theta0, s.theta1);
  for (int i = 0; i < 3; ++i) u.v(i) = uniform(rng, -s.v_max, s.v_max);
  for (int i = 0; i < 3; ++i) {
    const double mag = uniform(rng, s.q_min, s.q_max);
    u.q(i) = std::bernoulli_distribution(0.5)(rng) ? mag : -mag;
  }
  return u;
}

/// Radical inverse of `index` in `base`: the Halton coordinate. Prefixes of a
/// Halton sequence are nested, so a sweep of 2n points contains the n-point one.
inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

/// Deterministic (xi, U) sample number `i` (i >= 1) of a nested low-discrepancy
/// sweep: xi on the sphere from two coordinates, then rho, theta, v, q.
inline std::pair<Vec3, FluidState> halton_sample(std::uint64_t i, const StateSampler& s) {
  static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
  auto h = [&](int k) { return halton(i, primes[k]); };
  const double z = 2.0 * h(0) - 1.0;
  const double phi = 2.0 * std::numbers::pi * h(1);
  const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Vec3 xi(rxy * std::cos(phi), rxy * std::sin(phi), z);
  FluidState u;
  u.rho = s.rho0 + (s.rho1 - s.rho0) * h(2);
  u.theta = s.theta0 + (s.theta1 - s.theta0) * h(3);
  for (int k = 0; k < 3; ++k) u.v(k) = s.v_max * (2.0 * h(4 + k) - 1.0);
  for (int k = 0; k < 3; ++k) u.q(k) = s.q_max * (2.0 * h(7 + k) - 1.0);
  return {xi, u};
}

}  // namespace cattaneo
