#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cattaneo/errors.hpp"
#include "cattaneo/parallel.hpp"
#include "cattaneo/spectral.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo {

inline bool is_equilibrium(const FluidState& u, double tol = 1e-12) { return u.q.norm() <= tol; }

/// Constant-coefficient linearization W_t + sum_j A_j d_j W + B W = 0 about an
/// equilibrium. The 3D system has A_1..A_3; the 1D reduction has one matrix and
/// uses only xi(0).
struct LinearizedSystem {
  int n = kDim;
  std::vector<Eigen::MatrixXd> A;
  Eigen::MatrixXd B;
  EquilibriumState state;
  double tau = 1.0;
  bool one_dimensional = false;

  Eigen::MatrixXd symbol(const Vec3& xi) const {
    if (one_dimensional) return xi(0) * A[0];
    return xi(0) * A[0] + xi(1) * A[1] + xi(2) * A[2];
  }
  /// -(i A(xi) + B), the generator of each Fourier mode.
  Eigen::MatrixXcd generator(const Vec3& xi) const {
    const cplx i(0.0, 1.0);
    return -(i * symbol(xi).cast<cplx>() + B.cast<cplx>());
  }
};

inline LinearizedSystem linearize(const EquilibriumState& ve, const ThermoClosure& closure) {
  const FluidState u = ve.embed();
  require_admissible(u, "linearize");
  LinearizedSystem sys;
  sys.state = ve;
  sys.tau = closure.tau;
  for (const Direction& e : {Direction(1, 0, 0), Direction(0, 1, 0), Direction(0, 0, 1)})
    sys.A.emplace_back(assemble_A(e, u, closure).m);
  sys.B = jacobian_DQ(u, closure.tau).m;
  return sys;
}

/// Restriction to (rho, v1, theta, q1): rows/columns 0, 1, 4, 5 of A(e1; V_e).
inline LinearizedSystem reduce_1d(const EquilibriumState& ve, const ThermoClosure& closure) {
  const FluidState u = ve.embed();
  require_admissible(u, "reduce_1d");
  const Mat8 a = assemble_A(Direction(1, 0, 0), u, closure).m;
  constexpr std::array<int, 4> keep{kRho, kVel, kTheta, kFlux};
  Eigen::MatrixXd a1(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a1(i, j) = a(keep[i], keep[j]);
  LinearizedSystem sys;
  sys.n = 4;
  sys.one_dimensional = true;
  sys.state = ve;
  sys.tau = closure.tau;
  sys.A = {a1};
  sys.B = Eigen::MatrixXd::Zero(4, 4);
  sys.B(3, 3) = 1.0 / closure.tau;
  return sys;
}

// ---------------------------------------------------------------------------

struct CouplingWitness {
  Vec3 xi = Vec3::Zero();
  Eigen::VectorXd Z;  // unit norm
  double mu = 0.0;
  double kernel_residual = 0.0;  // |B Z|
  double eigen_residual = 0.0;   // |A(xi) Z - mu Z|
};

struct CouplingResult {
  bool violated = false;
  double margin = std::numeric_limits<double>::infinity();  // min over eigenvalues of sigma_min([A - mu; B])
  std::optional<CouplingWitness> witness;
};

/// Genuine-coupling test at one frequency: for each eigenvalue mu of A(xi),
/// the smallest singular value of the stacked matrix [A - mu I; B] measures how
/// close an eigenvector comes to ker B. Violated iff some value is <= tol.
inline CouplingResult genuinely_coupled(const LinearizedSystem& sys, const Vec3& xi,
                                        double tol = 1e-10) {
  if (!(xi.norm() > 0.0)) throw DomainError("genuinely_coupled: xi must be nonzero");
  const Eigen::MatrixXd a = sys.symbol(xi);
  const int n = sys.n;
  const auto es = eigen_structure(a);
  const double scale = std::max(1.0, es.norm);
  CouplingResult out;
  for (const auto& c : es.clusters) {
    Eigen::MatrixXcd stacked(2 * n, n);
    stacked.topRows(n) = a.cast<cplx>() - c.value * Eigen::MatrixXcd::Identity(n, n);
    stacked.bottomRows(n) = sys.B.cast<cplx>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
    const double smin = svd.singularValues()(n - 1) / scale;
    if (smin < out.margin) out.margin = smin;
    if (smin <= tol && !out.witness) {
      // The spectrum is real at equilibrium, so the kernel vector can be taken
      // real: rotate away the global phase of the complex singular vector.
      Eigen::VectorXcd zc = svd.matrixV().col(n - 1);
      int k;
      zc.cwiseAbs().maxCoeff(&k);
      zc *= std::polar(1.0, -std::arg(zc(k)));
      Eigen::VectorXd z = zc.real().normalized();
      CouplingWitness w;
      w.xi = xi;
      w.mu = z.dot(a * z);
      w.Z = z;
      w.kernel_residual = (sys.B * z).norm();
      w.eigen_residual = (a * z - w.mu * z).norm();
      out.witness = std::move(w);
    }
  }
  out.violated = out.margin <= tol;
  return out;
}

/// Closed-form kernel eigenvector (0, h, 0, 0, 0, 0) with |h| = 1, h ⊥ xi,
/// eigenvalue xi.v_e (3D only).
inline CouplingWitness kernel_witness(const LinearizedSystem& sys, const Vec3& xi) {
  if (sys.one_dimensional) throw DomainError("kernel_witness: the 1D system has no such mode");
  if (!(xi.norm() > 0.0)) throw DomainError("kernel_witness: xi must be nonzero");
  // Coordinate axis least aligned with xi, projected onto xi's complement.
  int k;
  xi.cwiseAbs().minCoeff(&k);
  const Vec3 w_hat = xi.normalized();
  const Vec3 h = (Vec3::Unit(k) - w_hat(k) * w_hat).normalized();
  CouplingWitness w;
  w.xi = xi;
  w.Z = Eigen::VectorXd::Zero(sys.n);
  w.Z.segment<3>(kVel) = h;
  w.mu = xi.dot(sys.state.v);
  const Eigen::MatrixXd a = sys.symbol(xi);
  w.kernel_residual = (sys.B * w.Z).norm();
  w.eigen_residual = (a * w.Z - w.mu * w.Z).norm();
  return w;
}

// ---------------------------------------------------------------------------
// Smooth branch of kernel eigenvectors near a fixed frequency.

struct BranchPoint {
  Vec3 h = Vec3::Zero();
  Vec8 Z = Vec8::Zero();
  double mu = 0.0;
};

/// xi -> (Z(xi), mu(xi)) with h(xi) = (xi x z') / (|xi_bar| |xi x z'|), so that
/// xi.h = 0, z'.h = 0, |h| = 1/|xi_bar| on the set where xi x z' != 0.
class WitnessBranch {
 public:
  WitnessBranch(const Vec3& xi_bar, const Vec3& z_prime, const Vec3& v_e)
      : xi_bar_(xi_bar), z_(z_prime), v_(v_e) {}

  BranchPoint operator()(const Vec3& xi) const {
    const Vec3 c = xi.cross(z_);
    const double cn = c.norm();
    if (!(cn >= 1e-12)) {
      throw DegenerateDirection("witness_branch: xi is parallel to the probe z'");
    }
    BranchPoint p;
    p.h = c / (xi_bar_.norm() * cn);
    p.Z.segment<3>(kVel) = p.h;
    p.mu = xi.dot(v_);
    return p;
  }

  const Vec3& center() const { return xi_bar_; }
  const Vec3& probe() const { return z_; }

  /// Residuals of the defining system: xi.h, z'.h, |h|^2 - 1/|xi_bar|^2.
  Vec3 defining_residuals(const Vec3& xi) const {
    const Vec3 h = (*this)(xi).h;
    return {xi.dot(h), z_.dot(h), h.squaredNorm() - 1.0 / xi_bar_.squaredNorm()};
  }

 private:
  Vec3 xi_bar_, z_, v_;
};

/// Unit vector orthogonal to `xi`, used when no probe is supplied.
inline Vec3 default_probe(const Vec3& xi) {
  int k;
  xi.cwiseAbs().minCoeff(&k);
  return xi.cross(Vec3::Unit(k)).normalized();
}

inline WitnessBranch witness_branch(const Direction& xi_bar, std::optional<Vec3> probe,
                                    const Vec3& v_e) {
  const Vec3 xb = xi_bar.xi();
  const Vec3 z = probe ? *probe : default_probe(xb);
  if (!(z.norm() > 0.0)) throw DomainError("witness_branch: probe must be nonzero");
  if (std::abs(z.dot(xb)) > 1e-12 * z.norm() * xb.norm()) {
    throw DomainError("witness_branch: probe must be orthogonal to xi_bar");
  }
  return WitnessBranch(xb, z, v_e);
}

// ---------------------------------------------------------------------------
// Frequency sweeps.

/// Icosahedron vertices refined `subdivisions` times and projected to the
/// sphere; 2 subdivisions give 162 points.
inline std::vector<Vec3> icosphere(int subdivisions = 2) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return v;
}

inline std::vector<double> log_space(double a, double b, int count) {
  if (!(a > 0.0) || !(b > 0.0) || count < 1) throw DomainError("log_space: need a, b > 0");
  std::vector<double> out(count);
  const double la = std::log10(a), lb = std::log10(b);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? a : std::pow(10.0, la + (lb - la) * i / (count - 1));
  return out;
}

struct SweepPoint {
  Vec3 xi = Vec3::Zero();
  std::vector<cplx> eigenvalues;
  double max_re = -std::numeric_limits<double>::infinity();
};

struct DissipativitySweep {
  std::vector<SweepPoint> points;
  double max_re = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
  cplx argmax_eigenvalue = 0.0;
  double threshold = 1e-10;
  bool strictly_dissipative = false;  // max_re < -threshold at every point
};

/// Eigenvalues of -(i A(xi) + B) at xi = r * omega for every direction and
/// radius. Points are ordered direction-major.
inline DissipativitySweep dissipativity_sweep(const LinearizedSystem& sys,
                                              const std::vector<Vec3>& directions,
                                              const std::vector<double>& radii,
                                              unsigned threads = 1, double threshold = 1e-10) {
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("dissipativity_sweep: radii must be positive");
  DissipativitySweep out;
  out.threshold = threshold;
  out.points.resize(directions.size() * radii.size());
  parallel_for(out.points.size(), threads, [&](std::size_t k) {
    const Vec3 xi = radii[k % radii.size()] * directions[k / radii.size()];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sys.generator(xi), false);
    if (es.info() != Eigen::Success) throw ConvergenceError("dissipativity_sweep: eigensolver failed");
    SweepPoint& p = out.points[k];
    p.xi = xi;
    p.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + sys.n);
    std::sort(p.eigenvalues.begin(), p.eigenvalues.end(), detail::cplx_less);
    for (const auto& z : p.eigenvalues) p.max_re = std::max(p.max_re, z.real());
  });
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    if (out.points[k].max_re > out.max_re) {
      out.max_re = out.points[k].max_re;
      out.argmax = k;
    }
  }
  if (!out.points.empty()) out.argmax_eigenvalue = out.points[out.argmax].eigenvalues.back();
  out.strictly_dissipative = !out.points.empty() && out.max_re < -threshold;
  return out;
}

/// Default grids: 162-point icosphere x 16 radii in [1e-2, 1e2] for 3D,
/// 64 radii in [0.1, 10] along e1 for 1D.
inline DissipativitySweep default_dissipativity_sweep(const LinearizedSystem& sys,
                                                      unsigned threads = 1) {
  if (sys.one_dimensional)
    return dissipativity_sweep(sys, {Vec3::UnitX()}, log_space(0.1, 10.0, 64), threads);
  return dissipativity_sweep(sys, icosphere(2), log_space(1e-2, 1e2, 16), threads);
}

}  // namespace cattaneo
