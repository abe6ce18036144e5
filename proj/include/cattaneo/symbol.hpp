#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cattaneo/errors.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Variable ordering used by every 8x8 object in the library:
//   0: rho, 1-3: v, 4: theta, 5-7: q
inline constexpr int kDim = 8;
inline constexpr int kRho = 0;
inline constexpr int kVel = 1;
inline constexpr int kTheta = 4;
inline constexpr int kFlux = 5;

/// Point U = (rho, v, theta, q) of the state space; admissible iff rho > 0 and
/// theta > 0.
struct FluidState {
  double rho = 1.0;
  Vec3 v = Vec3::Zero();
  double theta = 1.0;
  Vec3 q = Vec3::Zero();

  bool admissible() const { return rho > 0.0 && theta > 0.0; }

  Vec8 as_vector() const {
    Vec8 u;
    u << rho, v, theta, q;
    return u;
  }
};

inline void require_admissible(const FluidState& u, const char* where) {
  if (!u.admissible()) {
    throw DomainError(std::string(where) + ": state needs rho > 0 and theta > 0");
  }
}

/// Constant equilibrium state (q = 0).
struct EquilibriumState {
  double rho = 1.0;
  Vec3 v = Vec3::Zero();
  double theta = 1.0;

  FluidState embed() const { return FluidState{rho, v, theta, Vec3::Zero()}; }
};

/// Nonzero frequency vector; `unit()` records whether it was normalized on
/// construction.
class Direction {
 public:
  explicit Direction(const Vec3& xi) : xi_(xi) {
    if (!(xi.norm() > 0.0) || !xi.allFinite()) {
      throw DomainError("Direction: xi must be finite and nonzero");
    }
  }
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  static Direction normalized(const Vec3& xi) {
    Direction d(xi);
    d.xi_ /= d.xi_.norm();
    d.unit_ = true;
    return d;
  }

  const Vec3& xi() const { return xi_; }
  double norm() const { return xi_.norm(); }
  bool unit() const { return unit_; }

 private:
  Vec3 xi_;
  bool unit_ = false;
};

enum class SymbolTag { A, A0, N, DQ, S0, General };

inline const char* to_string(SymbolTag tag) {
  switch (tag) {
    case SymbolTag::A: return "A";
    case SymbolTag::A0: return "A0";
    case SymbolTag::N: return "N";
    case SymbolTag::DQ: return "DQ";
    case SymbolTag::S0: return "S0";
    case SymbolTag::General: return "A_lambda_nu";
  }
  return "?";
}

/// Dense 8x8 real matrix together with what it is and where it was evaluated.
struct Symbol8 {
  Mat8 m = Mat8::Zero();
  SymbolTag tag = SymbolTag::A;
  Vec3 xi = Vec3::Zero();
  FluidState state;
};

/// The scalar groups that fill the symbol, named as in the symmetrizer
/// equations: alpha = p_rho/rho, eta = p_theta/rho, beta = theta p_theta/(rho e_theta),
/// gamma = 1/(rho e_theta), delta = kappa/tau.
struct SymbolCoefficients {
  double rho = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

inline SymbolCoefficients symbol_coefficients(const FluidState& u, const ThermoClosure& closure) {
  require_admissible(u, "symbol_coefficients");
  const ThermoValues t = eval_closure(closure, u.rho, u.theta);
  SymbolCoefficients c;
  c.rho = u.rho;
  c.alpha = t.p_rho / u.rho;
  c.eta = t.p_theta / u.rho;
  c.beta = u.theta * t.p_theta / (u.rho * t.e_theta);
  c.gamma = 1.0 / (u.rho * t.e_theta);
  c.delta = t.kappa / closure.tau;
  return c;
}

/// Symbol, with respect to the velocity unknowns, of the first-order velocity
/// terms of the objective heat-flux derivative
///   -1/2 (grad v - grad v^T) q + lambda/2 (grad v + grad v^T) q + nu (div v) q,
/// where (grad v)_{ij} = d_j v_i. Entry (i, k) is the coefficient of v_k in
/// component i:
///   (lambda-1)/2 (xi.q) delta_ik + (lambda+1)/2 xi_i q_k + nu xi_k q_i.
inline Mat3 convective_block(const Vec3& xi, const Vec3& q, double lambda, double nu) {
  const double a = 0.5 * (lambda - 1.0);
  const double b = 0.5 * (lambda + 1.0);
  Mat3 blk = b * xi * q.transpose() + nu * q * xi.transpose();
  blk.diagonal().array() += a * xi.dot(q);
  return blk;
}

inline Mat3 convective_block(const Direction& xi, const Vec3& q, double lambda, double nu) {
  return convective_block(xi.xi(), q, lambda, nu);
}

/// Quasilinear symbol for the (lambda, nu) heat-flux law without the
/// nonzero-frequency check (xi = 0 gives the zero matrix).
inline Mat8 symbol_matrix(const Vec3& xi, const FluidState& u, const SymbolCoefficients& c,
                          double lambda, double nu, bool with_convective_block) {
  Mat8 a = Mat8::Zero();
  a.diagonal().setConstant(xi.dot(u.v));
  a.block<1, 3>(kRho, kVel) = c.rho * xi.transpose();
  a.block<3, 1>(kVel, kRho) = c.alpha * xi;
  a.block<3, 1>(kVel, kTheta) = c.eta * xi;
  a.block<1, 3>(kTheta, kVel) = c.beta * xi.transpose();
  a.block<1, 3>(kTheta, kFlux) = c.gamma * xi.transpose();
  a.block<3, 1>(kFlux, kTheta) = c.delta * xi;
  if (with_convective_block) {
    a.block<3, 3>(kFlux, kVel) = convective_block(xi, u.q, lambda, nu);
  }
  return a;
}

/// A0: the symbol without the heat-flux/velocity coupling (independent of q).
inline Symbol8 assemble_A0(const Direction& xi, const FluidState& u, const ThermoClosure& closure) {
  const auto c = symbol_coefficients(u, closure);
  return {symbol_matrix(xi.xi(), u, c, 1.0, -1.0, false), SymbolTag::A0, xi.xi(), u};
}

/// N = A - A0: only rows 6-8, columns 2-4 are nonzero.
inline Symbol8 assemble_N(const Direction& xi, const FluidState& u) {
  require_admissible(u, "assemble_N");
  Mat8 n = Mat8::Zero();
  n.block<3, 3>(kFlux, kVel) = convective_block(xi.xi(), u.q, 1.0, -1.0);
  return {n, SymbolTag::N, xi.xi(), u};
}

/// Full symbol A(xi; U) of the (1,-1) system.
inline Symbol8 assemble_A(const Direction& xi, const FluidState& u, const ThermoClosure& closure) {
  const auto c = symbol_coefficients(u, closure);
  return {symbol_matrix(xi.xi(), u, c, 1.0, -1.0, true), SymbolTag::A, xi.xi(), u};
}

/// Symbol for an arbitrary objective derivative parameter pair (lambda, nu).
inline Symbol8 assemble_general(const Direction& xi, const FluidState& u,
                                const ThermoClosure& closure, double lambda, double nu) {
  const auto c = symbol_coefficients(u, closure);
  return {symbol_matrix(xi.xi(), u, c, lambda, nu, true), SymbolTag::General, xi.xi(), u};
}

/// Relaxation source Q(U) = (0,0,0,0,0,q)/tau.
inline Vec8 source_Q(const FluidState& u, double tau) {
  if (!(tau > 0.0)) throw DomainError("source_Q: tau must be positive");
  Vec8 s = Vec8::Zero();
  s.segment<3>(kFlux) = u.q / tau;
  return s;
}

/// Jacobian of Q; the same constant matrix at every state.
inline Symbol8 jacobian_DQ(const FluidState& u, double tau) {
  if (!(tau > 0.0)) throw DomainError("jacobian_DQ: tau must be positive");
  Mat8 d = Mat8::Zero();
  d.diagonal().segment<3>(kFlux).setConstant(1.0 / tau);
  return {d, SymbolTag::DQ, Vec3::Zero(), u};
}

/// Diagonal symmetrizer diag(p_rho/rho^2, 1, 1, 1, e_theta/theta, tau/(kappa rho theta) x3)
/// of A0. It symmetrizes A0(xi; U) for every xi but not A(xi; U) when q != 0.
inline Symbol8 friedrichs_S0(const FluidState& u, const ThermoClosure& closure) {
  require_admissible(u, "friedrichs_S0");
  const ThermoValues t = eval_closure(closure, u.rho, u.theta);
  Vec8 d;
  const double flux = closure.tau / (t.kappa * u.rho * u.theta);
  d << t.p_rho / (u.rho * u.rho), 1.0, 1.0, 1.0, t.e_theta / u.theta, flux, flux, flux;
  Mat8 s = d.asDiagonal();
  return {s, SymbolTag::S0, Vec3::Zero(), u};
}

/// Extreme eigenvalues L0 <= <S0 Z, Z>/|Z|^2 <= L1 of the diagonal symmetrizer.
struct EnergyBounds {
  double L0 = 0.0;
  double L1 = 0.0;
};

inline EnergyBounds s0_bounds(const FluidState& u, const ThermoClosure& closure) {
  const Vec8 d = friedrichs_S0(u, closure).m.diagonal();
  return {d.minCoeff(), d.maxCoeff()};
}

}  // namespace cattaneo
