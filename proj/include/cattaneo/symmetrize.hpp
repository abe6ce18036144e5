#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cattaneo/errors.hpp"
#include "cattaneo/sampling.hpp"
#include "cattaneo/spectral.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo {

// ---------------------------------------------------------------------------
// Linear constraints S A - A^T S = 0 on a symmetric n x n matrix S.
//
// Unknowns are the upper triangle s_ab (a <= b), row-major. C = S A - A^T S is
// antisymmetric for symmetric S, so only the n(n-1)/2 entries above the
// diagonal are independent conditions; row (i:j) of a direction block is C_ij.

inline int unknown_count(int n) { return n * (n + 1) / 2; }
inline int equation_count(int n) { return n * (n - 1) / 2; }

/// Index of s_ab (0-based, a <= b) in the unknown vector.
inline int unknown_index(int n, int a, int b) {
  if (a > b) std::swap(a, b);
  return a * n - a * (a - 1) / 2 + (b - a);
}

/// Index of equation (i:j) (0-based, i < j) within one direction block.
inline int equation_index(int n, int i, int j) {
  return i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
}

struct UnknownPos {
  int a = 0, b = 0;  // 0-based, a <= b
};

inline UnknownPos unknown_position(int n, int idx) {
  for (int a = 0; a < n; ++a) {
    const int row = n - a;
    if (idx < row) return {a, a + idx};
    idx -= row;
  }
  throw DomainError("unknown_position: index out of range");
}

/// "s68" style label with 1-based indices.
inline std::string unknown_label(int n, int idx) {
  const auto p = unknown_position(n, idx);
  return "s" + std::to_string(p.a + 1) + std::to_string(p.b + 1);
}

/// Upper-triangle vector of a symmetric matrix.
inline Eigen::VectorXd pack_symmetric(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::VectorXd x(unknown_count(n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) x(unknown_index(n, a, b)) = s(a, b);
  return x;
}

inline Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& x, int n) {
  Eigen::MatrixXd s(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) s(a, b) = s(b, a) = x(unknown_index(n, a, b));
  return s;
}

/// Scale between s_ab and the Frobenius-orthonormal coordinate y_ab:
/// s_aa = y_aa, s_ab = y_ab / sqrt(2) off the diagonal, so |y| = ||S||_F.
inline double frobenius_factor(int n, int idx) {
  const auto p = unknown_position(n, idx);
  return p.a == p.b ? 1.0 : 1.0 / std::sqrt(2.0);
}

struct SymmetryConstraintSystem {
  int n = kDim;
  FluidState state;             // generating state (unset for generic input)
  std::vector<Vec3> directions; // one block of rows per direction
  Eigen::MatrixXd matrix;       // (n(n-1)/2 * blocks) x n(n+1)/2, acting on s
};

/// Constraint rows for an arbitrary list of n x n symbols.
inline SymmetryConstraintSystem build_constraints_from(const std::vector<Eigen::MatrixXd>& symbols) {
  if (symbols.empty()) throw DomainError("build_constraints: need at least one direction");
  const int n = static_cast<int>(symbols.front().rows());
  const int neq = equation_count(n);
  SymmetryConstraintSystem sys;
  sys.n = n;
  sys.matrix = Eigen::MatrixXd::Zero(neq * static_cast<int>(symbols.size()), unknown_count(n));
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const Eigen::MatrixXd& a = symbols[k];
    if (a.rows() != n || a.cols() != n) throw DomainError("build_constraints: size mismatch");
    for (int p = 0; p < n; ++p) {
      for (int q = p; q < n; ++q) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        e(p, q) = e(q, p) = 1.0;
        const Eigen::MatrixXd c = e * a - a.transpose() * e;
        const int col = unknown_index(n, p, q);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            sys.matrix(static_cast<int>(k) * neq + equation_index(n, i, j), col) = c(i, j);
      }
    }
  }
  return sys;
}

inline SymmetryConstraintSystem build_constraints(const FluidState& u,
                                                  const std::vector<Direction>& directions,
                                                  const ThermoClosure& closure) {
  require_admissible(u, "build_constraints");
  std::vector<Eigen::MatrixXd> symbols;
  for (const auto& d : directions) symbols.emplace_back(assemble_A(d, u, closure).m);
  auto sys = build_constraints_from(symbols);
  sys.state = u;
  for (const auto& d : directions) sys.directions.push_back(d.xi());
  return sys;
}

/// {e1, e2, e3} followed by `n_random` seeded uniform unit vectors.
inline std::vector<Direction> feasibility_directions(int n_random, std::uint64_t seed) {
  std::vector<Direction> dirs{Direction(1, 0, 0), Direction(0, 1, 0), Direction(0, 0, 1)};
  for (const auto& x : random_unit_vectors(n_random, seed)) dirs.emplace_back(x);
  return dirs;
}

// ---------------------------------------------------------------------------
// Null-space analysis and certificates.

struct NullSpace {
  Eigen::MatrixXd basis;  // columns orthonormal in the Frobenius coordinates y
  Eigen::VectorXd singular_values;
  int rank = 0;
};

/// Null space of `m` (acting on s) in Frobenius coordinates with cutoff
/// rel_tol * sigma_max.
inline NullSpace constraint_null_space(const Eigen::MatrixXd& m, int n, double rel_tol) {
  const int cols = static_cast<int>(m.cols());
  Eigen::MatrixXd scaled = m;
  for (int c = 0; c < cols; ++c) scaled.col(c) *= frobenius_factor(n, c);
  NullSpace ns;
  if (scaled.rows() == 0) {
    ns.basis = Eigen::MatrixXd::Identity(cols, cols);
    return ns;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
  ns.singular_values = svd.singularValues();
  const double smax = ns.singular_values.size() ? ns.singular_values(0) : 0.0;
  for (int i = 0; i < ns.singular_values.size(); ++i)
    if (ns.singular_values(i) > rel_tol * smax) ++ns.rank;
  ns.basis = svd.matrixV().rightCols(cols - ns.rank);
  return ns;
}

struct ForcedZero {
  int index = 0;      // unknown index
  std::string label;  // s_ab, 1-based
  double bound = 0.0; // max |s_ab| over unit-Frobenius null vectors
};

/// Coordinates that vanish on the whole null space: max |s_idx| over unit null
/// vectors is (row norm of the basis) * frobenius_factor.
inline std::vector<ForcedZero> forced_zeros(const NullSpace& ns, int n, double tol,
                                            const std::vector<int>& columns = {}) {
  std::vector<ForcedZero> out;
  for (int r = 0; r < ns.basis.rows(); ++r) {
    const int idx = columns.empty() ? r : columns[r];
    const double bound = (ns.basis.cols() ? ns.basis.row(r).norm() : 0.0) * frobenius_factor(n, idx);
    if (bound < tol) out.push_back({idx, unknown_label(n, idx), bound});
  }
  return out;
}

enum class Feasibility { Feasible, Infeasible, Inconclusive };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::Infeasible: return "infeasible";
    case Feasibility::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct SymmetrizerCertificate {
  Feasibility verdict = Feasibility::Inconclusive;
  int n = kDim;
  int null_dim = 0;
  int constraint_rows = 0;
  Eigen::MatrixXd null_basis;  // Frobenius coordinates
  std::vector<ForcedZero> forced;
  std::vector<int> forced_diagonal;  // 1-based indices i with s_ii forced to zero
  // PD search (always run when the null space is nontrivial)
  double pd_margin = -std::numeric_limits<double>::infinity();  // best lambda_min / ||S||_F
  std::optional<Eigen::MatrixXd> witness;  // normalized ||S||_F = 1
  double witness_min_eig = std::numeric_limits<double>::quiet_NaN();
  double witness_residual = std::numeric_limits<double>::quiet_NaN();
  // false when some q_i = 0 at a non-equilibrium state: the infeasibility
  // argument needs every component of q nonzero, so the verdict is numeric only
  bool within_hypothesis = true;
  std::vector<Vec3> directions;

  bool forced_zero(int a, int b) const {
    const int idx = unknown_index(n, a - 1, b - 1);
    return std::any_of(forced.begin(), forced.end(),
                       [idx](const ForcedZero& f) { return f.index == idx; });
  }
};

struct SymmetrizerCheck {
  double residual = 0.0;  // max_k ||S A_k - A_k^T S||_max
  double min_eig = 0.0;
  double asymmetry = 0.0;  // ||S - S^T||_max
};

inline SymmetrizerCheck validate_symmetrizer(const Eigen::MatrixXd& s,
                                             const std::vector<Eigen::MatrixXd>& symbols) {
  SymmetrizerCheck c;
  c.asymmetry = (s - s.transpose()).cwiseAbs().maxCoeff();
  for (const auto& a : symbols)
    c.residual = std::max(c.residual, (s * a - a.transpose() * s).cwiseAbs().maxCoeff());
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  c.min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
                  .eigenvalues()(0);
  return c;
}

struct PdSearchOptions {
  int restarts = 32;
  int iterations = 200;
  std::uint64_t seed = 20240611;
};

struct PdSearchResult {
  double margin = -std::numeric_limits<double>::infinity();  // lambda_min of unit-norm S
  Eigen::VectorXd coefficients;
};

/// Maximizes lambda_min(sum_i c_i B_i) over |c| = 1 by projected supergradient
/// ascent. lambda_min is concave in c, so restarts only guard against stalls at
/// kinks; the best iterate over all restarts is returned.
inline PdSearchResult pd_search(const std::vector<Eigen::MatrixXd>& basis,
                                const PdSearchOptions& opt = {}) {
  PdSearchResult best;
  const int k = static_cast<int>(basis.size());
  if (k == 0) return best;
  const int n = static_cast<int>(basis.front().rows());
  Rng rng(opt.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd c(k);
    for (int i = 0; i < k; ++i) c(i) = g(rng);
    c.normalize();
    for (int it = 0; it < opt.iterations; ++it) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < k; ++i) s += c(i) * basis[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      const double lmin = es.eigenvalues()(0);
      if (lmin > best.margin) {
        best.margin = lmin;
        best.coefficients = c;
      }
      const Eigen::VectorXd u = es.eigenvectors().col(0);
      Eigen::VectorXd grad(k);
      for (int i = 0; i < k; ++i) grad(i) = u.dot(basis[i] * u);
      // Tangential part only; the radial part is removed by the projection.
      grad -= grad.dot(c) * c;
      c += (0.5 / std::sqrt(it + 1.0)) * grad;
      c.normalize();
    }
  }
  return best;
}

struct FeasibilityOptions {
  double null_tol = 1e-10;  // singular-value cutoff relative to sigma_max
  double zero_tol = 1e-10;  // forced-zero threshold on max |s_ab|
  double pd_tol = 1e-8;     // feasible iff lambda_min / ||S||_F exceeds this
  PdSearchOptions pd;
};

/// Feasibility of a direction-independent symmetrizer for the given symbols.
inline SymmetrizerCertificate friedrichs_feasibility_matrices(
    const std::vector<Eigen::MatrixXd>& symbols, const FeasibilityOptions& opt = {}) {
  const auto sys = build_constraints_from(symbols);
  const int n = sys.n;
  const auto ns = constraint_null_space(sys.matrix, n, opt.null_tol);

  SymmetrizerCertificate cert;
  cert.n = n;
  cert.constraint_rows = static_cast<int>(sys.matrix.rows());
  cert.null_dim = static_cast<int>(ns.basis.cols());
  cert.null_basis = ns.basis;
  cert.forced = forced_zeros(ns, n, opt.zero_tol);
  for (const auto& f : cert.forced) {
    const auto p = unknown_position(n, f.index);
    if (p.a == p.b) cert.forced_diagonal.push_back(p.a + 1);
  }

  std::vector<Eigen::MatrixXd> mats;
  for (int j = 0; j < ns.basis.cols(); ++j) {
    Eigen::VectorXd s = ns.basis.col(j);
    for (int i = 0; i < s.size(); ++i) s(i) *= frobenius_factor(n, i);
    mats.push_back(unpack_symmetric(s, n));
  }
  const auto pd = pd_search(mats, opt.pd);
  cert.pd_margin = pd.margin;
  if (pd.coefficients.size() > 0 && pd.margin > opt.pd_tol) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < pd.coefficients.size(); ++i) s += pd.coefficients(i) * mats[i];
    s /= s.norm();
    const auto check = validate_symmetrizer(s, symbols);
    cert.witness = s;
    cert.witness_min_eig = check.min_eig;
    cert.witness_residual = check.residual;
  }

  if (!cert.forced_diagonal.empty()) {
    cert.verdict = Feasibility::Infeasible;
  } else if (cert.witness && cert.witness_min_eig > 0.0) {
    cert.verdict = Feasibility::Feasible;
  } else {
    cert.verdict = Feasibility::Inconclusive;
  }
  return cert;
}

/// Friedrichs feasibility at a state of the (1,-1) system over
/// {e1,e2,e3} + n_random seeded directions.
inline SymmetrizerCertificate friedrichs_feasibility(const FluidState& u,
                                                     const ThermoClosure& closure,
                                                     int n_random = 29,
                                                     const FeasibilityOptions& opt = {},
                                                     std::uint64_t direction_seed = 7) {
  require_admissible(u, "friedrichs_feasibility");
  const auto dirs = feasibility_directions(n_random, direction_seed);
  std::vector<Eigen::MatrixXd> symbols;
  for (const auto& d : dirs) symbols.emplace_back(assemble_A(d, u, closure).m);
  auto cert = friedrichs_feasibility_matrices(symbols, opt);
  for (const auto& d : dirs) cert.directions.push_back(d.xi());
  const bool equilibrium = u.q.isZero(0.0);
  cert.within_hypothesis = equilibrium || (u.q.array() != 0.0).all();
  return cert;
}

// ---------------------------------------------------------------------------
// Replay of the forced-zero cascade at the canonical directions.

struct CascadeStep {
  std::string equations;              // e.g. "(4:6)@e2 (4:8)@e2 (3:6)@e3"
  std::vector<std::string> expected;  // entries this step must force
  std::vector<std::string> forced;    // entries newly forced by this step
};

namespace detail {

struct CascadeEquation {
  int i, j;  // 1-based, i < j
  int dir;   // 0, 1, 2 for e1, e2, e3; -1 for all three
};

struct CascadePivot {
  const char* label;
  int component;  // q component whose vanishing breaks the step
};

struct CascadeSpec {
  std::vector<CascadeEquation> eqs;
  std::vector<const char*> expected;
  std::vector<CascadePivot> pivots;
};

inline const std::vector<CascadeSpec>& cascade_specs() {
  static const std::vector<CascadeSpec> specs = {
      {{{1, 6, -1}, {1, 7, -1}, {1, 8, -1}, {6, 7, -1}, {6, 8, -1}, {7, 8, -1}},
       {"s27", "s28", "s36", "s38", "s46", "s47", "s56", "s57", "s58"},
       {}},
      {{{4, 6, 1}, {4, 8, 1}, {3, 6, 2}},
       {"s67", "s78", "s68"},
       {{"N23(e2) = -q3", 2}, {"N23(e3) = q2", 1}}},
      {{{2, 5, -1}, {3, 5, -1}}, {"s23", "s24", "s34"}, {}},
      {{{1, 2, 2}, {1, 2, 1}, {1, 3, 0}},
       {"s18", "s17", "s16"},
       {{"N13(e3) = -q1", 0}, {"N12(e2) = -q1", 0}, {"N12(e1) = q2", 1}}},
      {{{2, 6, -1}, {3, 7, -1}, {4, 8, -1}}, {"s25", "s35", "s45"}, {}},
      {{{3, 8, -1}, {4, 6, -1}, {4, 7, -1}}, {"s88", "s66", "s77"}, {}},
  };
  return specs;
}

inline std::string describe(const std::vector<CascadeEquation>& eqs) {
  static const char* names[] = {"e1", "e2", "e3"};
  std::string s;
  for (const auto& e : eqs) {
    if (!s.empty()) s += ' ';
    s += "(" + std::to_string(e.i) + ":" + std::to_string(e.j) + ")@" +
         (e.dir < 0 ? std::string("e1,e2,e3") : std::string(names[e.dir]));
  }
  return s;
}

}  // namespace detail

/// Replays the elimination cascade: each step takes the listed (i:j)
/// equations at canonical directions, drops the unknowns already known to
/// vanish, and reports which further unknowns the subsystem forces to zero.
/// Ends with s66 = s77 = s88 = 0. Throws CascadeBroken if a pivot (a
/// component of q) vanishes or a step fails to force its entries.
inline std::vector<CascadeStep> forced_zero_trace(const FluidState& u, const ThermoClosure& closure,
                                                  double tol = 1e-10) {
  require_admissible(u, "forced_zero_trace");
  constexpr int n = kDim;
  const std::vector<Direction> canon{Direction(1, 0, 0), Direction(0, 1, 0), Direction(0, 0, 1)};
  const auto full = build_constraints(u, canon, closure);
  const int neq = equation_count(n);
  const double qscale = std::max(1.0, u.q.cwiseAbs().maxCoeff());

  std::vector<bool> known(unknown_count(n), false);
  std::vector<CascadeStep> trace;
  int step_no = 0;
  for (const auto& spec : detail::cascade_specs()) {
    ++step_no;
    for (const auto& p : spec.pivots) {
      if (std::abs(u.q(p.component)) <= 1e-14 * qscale) {
        throw CascadeBroken("forced_zero_trace: step " + std::to_string(step_no) + " pivot " +
                            p.label + " vanishes");
      }
    }
    std::vector<int> rows;
    for (const auto& e : spec.eqs) {
      for (int d = 0; d < 3; ++d) {
        if (e.dir >= 0 && e.dir != d) continue;
        rows.push_back(d * neq + equation_index(n, e.i - 1, e.j - 1));
      }
    }
    std::vector<int> cols;
    for (int c = 0; c < unknown_count(n); ++c)
      if (!known[c]) cols.push_back(c);
    Eigen::MatrixXd sub(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = full.matrix(rows[r], cols[c]);
    // Column scaling must follow the original indices.
    Eigen::MatrixXd scaled = sub;
    for (std::size_t c = 0; c < cols.size(); ++c) scaled.col(c) *= frobenius_factor(n, cols[c]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * sv(0)) ++rank;
    NullSpace ns;
    ns.basis = svd.matrixV().rightCols(static_cast<int>(cols.size()) - rank);

    CascadeStep step;
    step.equations = detail::describe(spec.eqs);
    for (const char* s : spec.expected) step.expected.emplace_back(s);
    for (const auto& f : forced_zeros(ns, n, tol, cols)) {
      known[f.index] = true;
      step.forced.push_back(f.label);
    }
    for (const auto& want : step.expected) {
      if (std::find(step.forced.begin(), step.forced.end(), want) == step.forced.end()) {
        throw CascadeBroken("forced_zero_trace: step " + std::to_string(step_no) + " (" +
                            step.equations + ") does not force " + want);
      }
    }
    trace.push_back(std::move(step));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Direction-dependent (microlocal) symmetrizer.

struct MicrolocalSymmetrizer {
  Eigen::MatrixXcd S;
  Vec3 xi = Vec3::Zero();
  FluidState state;
  double min_eigenvalue = 0.0;
  double residual = 0.0;         // ||S A - A^* S||_max
  double hermitian_error = 0.0;  // ||S - S^*||_max
  double condition = 0.0;        // eigenvector-matrix condition number of A
};

/// S = sum_j Pi_j^* Pi_j / m_j over the spectral projectors Pi_j of a real
/// diagonalizable matrix. With Pi_j = V_j W_j^* (V_j an orthonormal eigenspace
/// basis, W^* = V^{-1}) this is sum_j W_j W_j^* / m_j, which is positive
/// definite because W is invertible.
inline MicrolocalSymmetrizer microlocal_symmetrizer_of(const Eigen::MatrixXd& a,
                                                       double cond_limit = 1e8) {
  const auto es = eigen_structure(a);
  const auto diag = diagonalizability_check(a);
  if (diag.verdict != Diagonalizability::Diagonalizable || !es.complete ||
      !(es.condition <= cond_limit)) {
    throw NotDiagonalizable(std::string("microlocal_symmetrizer: symbol is ") +
                            to_string(diag.verdict) + ", condition " +
                            std::to_string(es.condition));
  }
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXcd w = es.vectors.inverse().adjoint();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
  int col = 0;
  for (const auto& c : es.clusters) {
    const auto wj = w.middleCols(col, c.geometric);
    s += (wj * wj.adjoint()) / static_cast<double>(c.algebraic);
    col += c.geometric;
  }
  MicrolocalSymmetrizer out;
  out.hermitian_error = (s - s.adjoint()).cwiseAbs().maxCoeff();
  s = 0.5 * (s + s.adjoint()).eval();
  const Eigen::MatrixXcd ac = a.cast<cplx>();
  out.residual = (s * ac - ac.adjoint() * s).cwiseAbs().maxCoeff();
  out.min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s, Eigen::EigenvaluesOnly).eigenvalues()(0);
  out.condition = es.condition;
  out.S = std::move(s);
  return out;
}

inline MicrolocalSymmetrizer microlocal_symmetrizer(const Direction& xi, const FluidState& u,
                                                    const ThermoClosure& closure) {
  auto out = microlocal_symmetrizer_of(assemble_A(xi, u, closure).m);
  out.xi = xi.xi();
  out.state = u;
  return out;
}

}  // namespace cattaneo
