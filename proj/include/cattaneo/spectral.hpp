#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cattaneo/errors.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Eigen-structure of small dense matrices.
//
// Eigenvalues come from a Schur-based solver; eigenvectors are NOT taken from
// it. A repeated root of a non-normal matrix is resolved by clustering the
// computed eigenvalues and taking the numerical null space of (M - mu I) at the
// cluster mean, which gives an orthonormal basis of each eigenspace and the
// geometric multiplicity directly.

struct EigenCluster {
  cplx value;             // cluster mean
  int algebraic = 0;      // number of computed eigenvalues in the cluster
  int geometric = 0;      // dim ker(M - value I), capped at `algebraic`
  Eigen::MatrixXcd basis; // n x geometric, orthonormal columns
  double next_singular_value = 0.0;  // first singular value above the rank cut
};

struct EigenStructure {
  std::vector<cplx> eigenvalues;  // sorted by real part, then imaginary part
  std::vector<EigenCluster> clusters;  // sorted by value (real, then imaginary)
  Eigen::MatrixXcd vectors;  // concatenated cluster bases
  bool complete = false;     // geometric == algebraic for every cluster
  double condition = std::numeric_limits<double>::infinity();
  double residual = 0.0;     // max_j ||M B_j - mu_j B_j||_2 / max(1, ||M||_2)
  double norm = 0.0;         // ||M||_2
};

struct EigenOptions {
  double cluster_tol = 1e-7;  // relative to max(1, spectral radius)
  double rank_tol = 1e-8;     // relative to max(1, ||M||_2)
};

namespace detail {

inline bool cplx_less(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Single-linkage clusters of `values` with threshold `tol`; returns member
/// index lists sorted by the cluster's smallest member.
inline std::vector<std::vector<int>> cluster_values(const std::vector<cplx>& values, double tol) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= tol) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

template <typename Matrix>
Eigen::MatrixXcd null_space_basis(const Matrix& shifted, int max_dim, double cut,
                                  double* next_sv) {
  Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const int n = static_cast<int>(shifted.cols());
  int dim = 0;
  for (int i = n - 1; i >= 0 && dim < max_dim; --i) {
    if (s(i) <= cut) ++dim; else break;
  }
  *next_sv = (n - dim - 1 >= 0) ? s(n - dim - 1) : 0.0;
  return svd.matrixV().rightCols(dim).template cast<cplx>();
}

}  // namespace detail

/// Eigenvalues, eigenspaces and eigenvector conditioning of a square matrix
/// (real or complex).
template <typename Derived>
EigenStructure eigen_structure(const Eigen::MatrixBase<Derived>& input,
                               const EigenOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  constexpr bool kComplex = Eigen::NumTraits<Scalar>::IsComplex;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense m = input;
  const int n = static_cast<int>(m.rows());
  if (m.rows() != m.cols() || n == 0) throw DomainError("eigen_structure: need a square matrix");
  if (!m.allFinite()) throw NumericalError("eigen_structure: non-finite matrix entries");

  EigenStructure out;
  Eigen::VectorXcd raw;
  if constexpr (kComplex) {
    Eigen::ComplexEigenSolver<Dense> es(m, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("complex eigensolver did not converge");
    raw = es.eigenvalues();
  } else {
    Eigen::EigenSolver<Dense> es(m, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("real eigensolver did not converge");
    raw = es.eigenvalues();
  }
  out.eigenvalues.assign(raw.data(), raw.data() + n);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), detail::cplx_less);

  double radius = 0.0;
  for (const auto& z : out.eigenvalues) radius = std::max(radius, std::abs(z));
  out.norm = Eigen::JacobiSVD<Dense>(m).singularValues()(0);
  const double cluster_tol = opt.cluster_tol * std::max(1.0, radius);
  const double rank_cut = opt.rank_tol * std::max(1.0, out.norm);

  const auto groups = detail::cluster_values(out.eigenvalues, cluster_tol);
  int total = 0;
  out.complete = true;
  for (const auto& g : groups) {
    EigenCluster c;
    cplx mean = 0.0;
    for (int i : g) mean += out.eigenvalues[i];
    mean /= static_cast<double>(g.size());
    c.algebraic = static_cast<int>(g.size());
    const bool real_root = std::abs(mean.imag()) <= cluster_tol;
    if constexpr (!kComplex) {
      if (real_root) {
        mean = cplx(mean.real(), 0.0);
        const Dense shifted = m - mean.real() * Dense::Identity(n, n);
        c.basis = detail::null_space_basis(shifted, c.algebraic, rank_cut, &c.next_singular_value);
      } else {
        const Eigen::MatrixXcd shifted =
            m.template cast<cplx>() - mean * Eigen::MatrixXcd::Identity(n, n);
        c.basis = detail::null_space_basis(shifted, c.algebraic, rank_cut, &c.next_singular_value);
      }
    } else {
      (void)real_root;
      const Eigen::MatrixXcd shifted = m - mean * Eigen::MatrixXcd::Identity(n, n);
      c.basis = detail::null_space_basis(shifted, c.algebraic, rank_cut, &c.next_singular_value);
    }
    c.value = mean;
    c.geometric = static_cast<int>(c.basis.cols());
    if (c.geometric < c.algebraic) out.complete = false;
    total += c.geometric;
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const EigenCluster& a, const EigenCluster& b) { return detail::cplx_less(a.value, b.value); });

  out.vectors.resize(n, total);
  int col = 0;
  const Eigen::MatrixXcd mc = m.template cast<cplx>();
  for (const auto& c : out.clusters) {
    out.vectors.middleCols(col, c.geometric) = c.basis;
    col += c.geometric;
    if (c.geometric > 0) {
      const Eigen::MatrixXcd r = mc * c.basis - c.value * c.basis;
      const double rn = Eigen::JacobiSVD<Eigen::MatrixXcd>(r).singularValues()(0);
      out.residual = std::max(out.residual, rn / std::max(1.0, out.norm));
    }
  }
  if (out.complete) {
    const auto s = Eigen::JacobiSVD<Eigen::MatrixXcd>(out.vectors).singularValues();
    out.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form characteristic speeds of the (1,-1) system.

struct SpectrumReport {
  // closed form
  double eta0 = 0.0;  // xi.v, multiplicity 4
  double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0, eta4 = 0.0;
  double z_plus_sq = 0.0, z_minus_sq = 0.0;
  double theta_sum = 0.0;  // p_rho + theta p_theta^2/(rho^2 e_theta) + kappa/(rho e_theta tau)
  double phi = 0.0;        // 4 p_rho kappa / (rho e_theta tau)
  // numeric (filled by spectrum_report)
  std::vector<cplx> numeric;
  double condition = std::numeric_limits<double>::infinity();
  double pairing_error = std::numeric_limits<double>::quiet_NaN();

  /// Closed-form multiset in ascending order {eta3, eta4, eta0 x4, eta2, eta1}.
  std::array<double, 8> sorted_closed_form() const {
    return {eta3, eta4, eta0, eta0, eta0, eta0, eta2, eta1};
  }
};

/// Speeds for a unit direction are xi.v +- sqrt(z^2); a general xi = |xi| w
/// gives xi.v +- |xi| sqrt(z^2(w)).
inline SpectrumReport char_speeds(const Direction& xi, const FluidState& u,
                                  const ThermoClosure& closure) {
  require_admissible(u, "char_speeds");
  const ThermoValues t = eval_closure(closure, u.rho, u.theta);
  SpectrumReport r;
  const double rho_e = u.rho * t.e_theta;
  r.theta_sum = t.p_rho + u.theta * t.p_theta * t.p_theta / (u.rho * rho_e) +
                t.kappa / (rho_e * closure.tau);
  r.phi = 4.0 * t.p_rho * t.kappa / (rho_e * closure.tau);
  double disc = r.theta_sum * r.theta_sum - r.phi;
  if (disc < -1e-12) {
    throw NumericalError("char_speeds: negative discriminant " + std::to_string(disc) +
                         " (closure violates the positivity assumptions?)");
  }
  disc = std::max(disc, 0.0);
  const double root = std::sqrt(disc);
  r.z_plus_sq = 0.5 * (r.theta_sum + root);
  if (r.phi <= 1e-8 * r.theta_sum * r.theta_sum) {
    // z-^2 = (Phi/4)/z+^2 avoids cancellation in Theta - sqrt(Theta^2 - Phi).
    r.z_minus_sq = 0.25 * r.phi / r.z_plus_sq;
  } else {
    r.z_minus_sq = 0.5 * (r.theta_sum - root);
  }
  const double scale = xi.norm();
  const double c_plus = scale * std::sqrt(r.z_plus_sq);
  const double c_minus = scale * std::sqrt(r.z_minus_sq);
  r.eta0 = xi.xi().dot(u.v);
  r.eta1 = r.eta0 + c_plus;
  r.eta2 = r.eta0 + c_minus;
  r.eta3 = r.eta0 - c_plus;
  r.eta4 = r.eta0 - c_minus;
  return r;
}

struct NumericSpectrum {
  std::vector<cplx> eigenvalues;
  Eigen::MatrixXcd vectors;
  double condition = std::numeric_limits<double>::infinity();
  double residual = 0.0;
};

/// General dense eigen-solve used as the oracle for the closed forms.
template <typename Derived>
NumericSpectrum spectrum_numeric(const Eigen::MatrixBase<Derived>& m) {
  EigenStructure es = eigen_structure(m);
  return {std::move(es.eigenvalues), std::move(es.vectors), es.condition, es.residual};
}

inline NumericSpectrum spectrum_numeric(const Symbol8& s) { return spectrum_numeric(s.m); }

/// Max |closed form - numeric| after sorting both by real part.
inline double pairing_error(const SpectrumReport& closed, const std::vector<cplx>& numeric) {
  if (numeric.size() != 8) throw DomainError("pairing_error: need 8 eigenvalues");
  const auto cf = closed.sorted_closed_form();
  double err = 0.0;
  for (int i = 0; i < 8; ++i) err = std::max(err, std::abs(numeric[i] - cplx(cf[i], 0.0)));
  return err;
}

/// Closed form and numeric spectrum of A(xi; U) side by side.
inline SpectrumReport spectrum_report(const Direction& xi, const FluidState& u,
                                      const ThermoClosure& closure) {
  SpectrumReport r = char_speeds(xi, u, closure);
  const auto es = eigen_structure(assemble_A(xi, u, closure).m);
  r.numeric = es.eigenvalues;
  r.condition = es.condition;
  r.pairing_error = pairing_error(r, r.numeric);
  return r;
}

// ---------------------------------------------------------------------------

struct SpeedMultiplicity {
  double speed = 0.0;
  int multiplicity = 0;
};

/// Clusters the numeric eigenvalues of any real matrix (tolerance
/// tol * max(1, spectral radius)) into (speed, algebraic multiplicity) pairs.
template <typename Derived>
std::vector<SpeedMultiplicity> cluster_speeds(const Eigen::MatrixBase<Derived>& m, double tol) {
  EigenOptions opt;
  opt.cluster_tol = tol;
  const auto es = eigen_structure(m, opt);
  std::vector<SpeedMultiplicity> out;
  for (const auto& c : es.clusters) out.push_back({c.value.real(), c.algebraic});
  return out;
}

/// Multiplicity profile of A(xi; U); throws ProfileMismatch unless it is
/// one quadruple root and four simple ones.
inline std::vector<SpeedMultiplicity> multiplicity_profile(const Direction& xi,
                                                           const FluidState& u,
                                                           const ThermoClosure& closure,
                                                           double tol = 1e-7) {
  const auto out = cluster_speeds(assemble_A(xi, u, closure).m, tol);
  std::vector<int> mult;
  for (const auto& s : out) mult.push_back(s.multiplicity);
  std::sort(mult.begin(), mult.end());
  if (mult != std::vector<int>{1, 1, 1, 1, 4}) {
    std::string got;
    for (int k : mult) got += std::to_string(k) + " ";
    throw ProfileMismatch("multiplicity_profile: expected {4,1,1,1,1}, got { " + got + "}");
  }
  return out;
}

/// Smallest distance between distinct cluster means of a real-spectrum matrix.
template <typename Derived>
double min_speed_gap(const Eigen::MatrixBase<Derived>& m, double tol = 1e-7) {
  EigenOptions opt;
  opt.cluster_tol = tol;
  const auto es = eigen_structure(m, opt);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < es.clusters.size(); ++i)
    for (std::size_t j = i + 1; j < es.clusters.size(); ++j)
      gap = std::min(gap, std::abs(es.clusters[i].value - es.clusters[j].value));
  return gap;
}

// ---------------------------------------------------------------------------
// Uniform separation constants over a state box.

struct GapBounds {
  double delta1 = 0.0;  // lower bound of z+^2
  double delta2 = 0.0;  // upper bound of z+^2
  double delta3 = 0.0;  // lower bound of z-^2
  double delta4 = 0.0;  // lower bound of sqrt(z+^2) - sqrt(z-^2)
  double delta = 0.0;   // min(delta1, delta3, delta4)
  // delta1 and delta3 bound squared speeds; they bound the speeds themselves only when <= 1.
  bool bounds_gap = false;
  StateBox box;
  double tau = 0.0;
};

inline GapBounds gap_bounds(const StateBox& box, double tau) {
  if (!(box.M1 > 0.0) || box.M1 > box.M2 || !(box.rho0 > 0.0) || !(box.theta0 > 0.0) ||
      box.rho0 > box.rho1 || box.theta0 > box.theta1) {
    throw DomainError("gap_bounds: invalid state box");
  }
  if (!(tau > 0.0)) throw DomainError("gap_bounds: tau must be positive");
  const double M1 = box.M1, M2 = box.M2;
  const double r0 = box.rho0, r1 = box.rho1, t0 = box.theta0, t1 = box.theta1;
  GapBounds g;
  g.box = box;
  g.tau = tau;
  g.delta1 = 0.5 * (M1 + t0 * M1 * M1 / (r1 * r1 * M2) + M1 / (r1 * M2 * tau));
  g.delta2 = M2 + t1 * M2 * M2 / (r0 * r0 * M1) + M2 / (r0 * M1 * tau);
  g.delta3 = M1 * M1 / (std::sqrt(2.0) * r1 * M2 * tau) /
             (g.delta2 + 2.0 * M2 / std::sqrt(r0 * M1 * tau));
  g.delta4 = t0 * M1 * M1 / (2.0 * r1 * r1 * M2) / std::sqrt(g.delta2);
  g.delta = std::min({g.delta1, g.delta3, g.delta4});
  g.bounds_gap = g.delta1 <= 1.0 && g.delta3 <= 1.0;
  return g;
}

// ---------------------------------------------------------------------------

enum class Diagonalizability { Diagonalizable, Defective, Complex };

inline const char* to_string(Diagonalizability d) {
  switch (d) {
    case Diagonalizability::Diagonalizable: return "diagonalizable";
    case Diagonalizability::Defective: return "defective";
    case Diagonalizability::Complex: return "complex";
  }
  return "?";
}

struct DiagonalizabilityResult {
  Diagonalizability verdict = Diagonalizability::Diagonalizable;
  double condition = std::numeric_limits<double>::infinity();
  double max_imag = 0.0;  // largest |Im| over cluster means
};

/// Real diagonalizability: every eigenvalue real (|Im| <= tol * scale) and the
/// eigenvector matrix has condition number <= 1/tol.
template <typename Derived>
DiagonalizabilityResult diagonalizability_check(const Eigen::MatrixBase<Derived>& m,
                                                double tol = 1e-8) {
  const auto es = eigen_structure(m);
  DiagonalizabilityResult r;
  double radius = 0.0;
  for (const auto& z : es.eigenvalues) radius = std::max(radius, std::abs(z));
  const double scale = std::max(1.0, radius);
  for (const auto& c : es.clusters) r.max_imag = std::max(r.max_imag, std::abs(c.value.imag()));
  r.condition = es.condition;
  if (r.max_imag > tol * scale) {
    r.verdict = Diagonalizability::Complex;
  } else if (!es.complete || !(es.condition <= 1.0 / tol)) {
    r.verdict = Diagonalizability::Defective;
  }
  return r;
}

}  // namespace cattaneo
