#pragma once

// Exact-rational evaluation of the characteristic-speed invariants and the
// gap constants. Square roots are taken only where the argument is a perfect
// rational square; the irrational constants are returned squared.

#include <cstdint>
#include <stdexcept>

#include <boost/rational.hpp>

namespace oracle {

using Q = boost::rational<std::int64_t>;

inline std::int64_t isqrt_exact(std::int64_t n) {
  if (n < 0) throw std::domain_error("isqrt_exact: negative");
  std::int64_t r = 0;
  while ((r + 1) * (r + 1) <= n) ++r;
  if (r * r != n) throw std::domain_error("isqrt_exact: not a perfect square");
  return r;
}

inline Q sqrt_exact(const Q& x) { return Q(isqrt_exact(x.numerator()), isqrt_exact(x.denominator())); }

inline double to_double(const Q& x) { return boost::rational_cast<double>(x); }

/// Theta and Phi for closure derivative data given as rationals.
struct SpeedInvariants {
  Q theta_sum, phi, z_plus_sq, z_minus_sq;
};

/// z^2 roots of z^4 - Theta z^2 + Phi/4; needs Theta^2 - Phi to be a rational square.
inline SpeedInvariants speed_invariants(Q rho, Q theta, Q p_rho, Q p_theta, Q e_theta, Q kappa,
                                        Q tau) {
  SpeedInvariants s;
  s.theta_sum = p_rho + theta * p_theta * p_theta / (rho * rho * e_theta) + kappa / (rho * e_theta * tau);
  s.phi = Q(4) * p_rho * kappa / (rho * e_theta * tau);
  const Q root = sqrt_exact(s.theta_sum * s.theta_sum - s.phi);
  s.z_plus_sq = (s.theta_sum + root) / Q(2);
  s.z_minus_sq = (s.theta_sum - root) / Q(2);
  return s;
}

struct ExactGap {
  Q delta1, delta2;
  Q delta3_sq, delta4_sq;  // the constants themselves carry sqrt(2) and sqrt(delta2)
};

/// Requires rho0 * M1 * tau to be a rational square.
inline ExactGap exact_gap(Q M1, Q M2, Q rho0, Q rho1, Q theta0, Q theta1, Q tau) {
  ExactGap g;
  g.delta1 = (M1 + theta0 * M1 * M1 / (rho1 * rho1 * M2) + M1 / (rho1 * M2 * tau)) / Q(2);
  g.delta2 = M2 + theta1 * M2 * M2 / (rho0 * rho0 * M1) + M2 / (rho0 * M1 * tau);
  const Q s = sqrt_exact(rho0 * M1 * tau);
  const Q lead = M1 * M1 / (rho1 * M2 * tau);  // delta3 = lead / sqrt(2) / denom
  const Q denom = g.delta2 + Q(2) * M2 / s;
  g.delta3_sq = lead * lead / (Q(2) * denom * denom);
  const Q num4 = theta0 * M1 * M1 / (Q(2) * rho1 * rho1 * M2);
  g.delta4_sq = num4 * num4 / g.delta2;
  return g;
}

}  // namespace oracle
