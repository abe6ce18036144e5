#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <fftw3.h>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cattaneo/coupling.hpp"
#include "cattaneo/errors.hpp"
#include "cattaneo/parallel.hpp"
#include "cattaneo/sampling.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/thermo.hpp"

namespace cattaneo {

// Periodic box [0, L1) x [0, L2) x [0, L3) with N points per axis.
//
// Conventions used everywhere below:
//   forward:  V_hat(k) = N^-3 sum_x V(x) exp(-i xi_k . x)
//   inverse:  V(x)     = sum_k V_hat(k) exp(+i xi_k . x)
//   xi_k = 2 pi k / L with k in {-N/2, ..., N/2 - 1}
//   ||V||_{L2}^2 = L1 L2 L3 sum_k |V_hat(k)|^2
struct SpectralGrid {
  int N = 32;
  std::array<double, 3> L{2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi};

  SpectralGrid() = default;
  SpectralGrid(int n, std::array<double, 3> lengths) : N(n), L(lengths) { validate(); }

  void validate() const {
    if (N < 2 || (N & (N - 1)) != 0) throw DomainError("SpectralGrid: N must be a power of two >= 2");
    for (double l : L)
      if (!(l > 0.0)) throw DomainError("SpectralGrid: box lengths must be positive");
  }

  std::size_t modes() const { return static_cast<std::size_t>(N) * N * N; }
  double volume() const { return L[0] * L[1] * L[2]; }
  double spacing(int axis) const { return 2 * std::numbers::pi / L[axis]; }

  /// Signed lattice index of storage position j.
  int wavenumber(int j) const { return j < N / 2 ? j : j - N; }
  int position(int k) const { return k >= 0 ? k : k + N; }

  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * N + j) * N + k;
  }
  std::array<int, 3> unflat(std::size_t m) const {
    const int k = static_cast<int>(m % N);
    const int j = static_cast<int>((m / N) % N);
    const int i = static_cast<int>(m / (static_cast<std::size_t>(N) * N));
    return {i, j, k};
  }
  Vec3 xi(std::size_t m) const {
    const auto p = unflat(m);
    return {spacing(0) * wavenumber(p[0]), spacing(1) * wavenumber(p[1]),
            spacing(2) * wavenumber(p[2])};
  }
  /// Storage index of the mode with lattice vector -k.
  std::size_t mirror(std::size_t m) const {
    const auto p = unflat(m);
    return flat((N - p[0]) % N, (N - p[1]) % N, (N - p[2]) % N);
  }
  bool is_nyquist(std::size_t m) const {
    const auto p = unflat(m);
    return p[0] == N / 2 || p[1] == N / 2 || p[2] == N / 2;
  }
};

/// 8-component field on a SpectralGrid, stored component-major
/// (component c of mode m at c * N^3 + m). The spectral array is canonical;
/// `physical` is a cache refreshed by synchronize_physical().
struct WaveField {
  SpectralGrid grid;
  std::vector<cplx> spectral;
  std::vector<cplx> physical;
  bool physical_current = false;

  static WaveField zeros(const SpectralGrid& g) {
    WaveField f;
    f.grid = g;
    f.spectral.assign(kDim * g.modes(), cplx(0.0));
    return f;
  }

  cplx& coeff(int component, std::size_t mode) {
    physical_current = false;
    return spectral[component * grid.modes() + mode];
  }
  cplx coeff(int component, std::size_t mode) const {
    return spectral[component * grid.modes() + mode];
  }
  Eigen::Matrix<cplx, 8, 1> mode(std::size_t m) const {
    Eigen::Matrix<cplx, 8, 1> v;
    for (int c = 0; c < kDim; ++c) v(c) = coeff(c, m);
    return v;
  }
  void set_mode(std::size_t m, const Eigen::Matrix<cplx, 8, 1>& v) {
    for (int c = 0; c < kDim; ++c) coeff(c, m) = v(c);
  }

  void synchronize_physical();
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  ~FftwPlan() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

/// In-place batched 3D transform of the 8 components. FFTW_ESTIMATE keeps
/// plans (and hence results) independent of timing measurements.
inline void transform(std::vector<cplx>& data, int n, int sign) {
  static_assert(sizeof(cplx) == sizeof(fftw_complex));
  const int dims[3] = {n, n, n};
  const int dist = n * n * n;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  FftwPlan p;
  {
    std::lock_guard lock(fftw_planner_mutex());
    p.plan = fftw_plan_many_dft(3, dims, kDim, ptr, nullptr, 1, dist, ptr, nullptr, 1, dist, sign,
                                FFTW_ESTIMATE);
  }
  if (!p.plan) throw NumericalError("FFTW could not create a plan");
  fftw_execute(p.plan);
}

}  // namespace detail

inline void WaveField::synchronize_physical() {
  if (physical_current) return;
  physical = spectral;
  detail::transform(physical, grid.N, FFTW_BACKWARD);
  physical_current = true;
}

/// Field from physical values (component-major, same layout).
inline WaveField from_physical(const SpectralGrid& g, std::vector<cplx> values) {
  if (values.size() != kDim * g.modes()) throw DomainError("from_physical: size mismatch");
  WaveField f;
  f.grid = g;
  f.spectral = values;
  detail::transform(f.spectral, g.N, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(g.modes());
  for (auto& z : f.spectral) z *= scale;
  f.physical = std::move(values);
  f.physical_current = true;
  return f;
}

/// max |Im V(x)| / max(1e-300, max |V(x)|) over the physical grid.
inline double imaginary_fraction(WaveField& f) {
  f.synchronize_physical();
  double im = 0.0, mag = 0.0;
  for (const auto& z : f.physical) {
    im = std::max(im, std::abs(z.imag()));
    mag = std::max(mag, std::abs(z));
  }
  return im / std::max(mag, 1e-300);
}

/// max_k |V_hat(-k) - conj(V_hat(k))|.
inline double conjugate_symmetry_error(const WaveField& f) {
  double err = 0.0;
  for (std::size_t m = 0; m < f.grid.modes(); ++m) {
    const std::size_t mm = f.grid.mirror(m);
    for (int c = 0; c < kDim; ++c)
      err = std::max(err, std::abs(f.coeff(c, mm) - std::conj(f.coeff(c, m))));
  }
  return err;
}

// ---------------------------------------------------------------------------
// Cut-off and persistent data.

struct BumpSpec {
  Vec3 center{3.0, 0.0, 0.0};  // must be a lattice point
  double r_inner = 1.2;        // phi = 1 for |xi - center| <= r_inner
  double r_outer = 2.4;        // phi = 0 for |xi - center| >= r_outer
  Vec3 probe{0.0, 0.0, 1.0};   // z', orthogonal to center
};

/// C-infinity cut-off: 1 inside r_inner, 0 outside r_outer, and
/// g(1-t) / (g(1-t) + g(t)) with g(s) = exp(-1/s) in between.
inline double bump(const BumpSpec& b, const Vec3& xi) {
  const double d = (xi - b.center).norm();
  if (d <= b.r_inner) return 1.0;
  if (d >= b.r_outer) return 0.0;
  const double t = (d - b.r_inner) / (b.r_outer - b.r_inner);
  auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = g(1.0 - t), c = g(t);
  return a / (a + c);
}

inline void validate_bump(const SpectralGrid& g, const BumpSpec& b) {
  if (!(b.r_inner > 0.0) || !(b.r_inner < b.r_outer)) {
    throw DomainError("bump: need 0 < r_inner < r_outer");
  }
  for (int a = 0; a < 3; ++a) {
    const double k = b.center(a) / g.spacing(a);
    if (std::abs(k - std::round(k)) > 1e-9) throw DomainError("bump: center is not a lattice point");
    if (std::abs(b.center(a)) + b.r_outer >= (g.N / 2) * g.spacing(a)) {
      throw DomainError("bump: support reaches the Nyquist planes");
    }
  }
  if (!(b.center.norm() > b.r_outer)) throw DomainError("bump: support contains xi = 0");
}

/// V_hat(xi) = phi(xi) Z(xi) on the bump around xi_bar and its conjugate image
/// on the mirrored bump; Z(xi) = (0, h(xi), 0, 0, 0, 0) lies in ker DQ.
inline WaveField persistent_initial_data(const SpectralGrid& g, const BumpSpec& b,
                                         const EquilibriumState& ve) {
  g.validate();
  validate_bump(g, b);
  const auto branch = witness_branch(Direction(b.center), b.probe, ve.v);
  WaveField f = WaveField::zeros(g);
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const Vec3 xi = g.xi(m);
    const double phi = bump(b, xi);
    if (phi == 0.0) continue;
    const Vec8 z = phi * branch(xi).Z;
    const std::size_t mm = g.mirror(m);
    for (int c = 0; c < kDim; ++c) {
      f.coeff(c, m) = z(c);
      f.coeff(c, mm) = z(c);  // conj of a real coefficient
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Exact per-mode evolution and diagnostics.

/// Each mode multiplied by exp(-t (i A(xi) + B)); zero modes are skipped so
/// the spectral support never grows.
inline WaveField evolve(const WaveField& field, const LinearizedSystem& sys, double t,
                        unsigned threads = 1) {
  if (sys.n != kDim || sys.one_dimensional) throw DomainError("evolve: needs the 3D system");
  WaveField out = field;
  out.physical_current = false;
  out.physical.clear();
  if (t == 0.0) return out;
  const auto& g = field.grid;
  parallel_for(g.modes(), threads, [&](std::size_t m) {
    const auto v = field.mode(m);
    if (v.isZero(0.0)) return;
    const Eigen::MatrixXcd e = (t * sys.generator(g.xi(m))).exp();
    const Eigen::Matrix<cplx, 8, 1> w = e * v;
    if (!w.allFinite()) {
      throw NumericalError("evolve: matrix exponential is not finite at mode " + std::to_string(m));
    }
    for (int c = 0; c < kDim; ++c) out.spectral[c * g.modes() + m] = w(c);
  });
  return out;
}

inline double l2_norm_squared(const WaveField& f) {
  double s = 0.0;
  for (const auto& z : f.spectral) s += std::norm(z);
  return f.grid.volume() * s;
}

inline double l2_norm(const WaveField& f) { return std::sqrt(l2_norm_squared(f)); }

/// L1 L2 L3 sum_k <S0(V_e) W_hat(k), W_hat(k)>.
inline double s0_energy(const WaveField& f, const EquilibriumState& ve, const ThermoClosure& closure) {
  const Vec8 d = friedrichs_S0(ve.embed(), closure).m.diagonal();
  double s = 0.0;
  for (int c = 0; c < kDim; ++c) {
    double part = 0.0;
    for (std::size_t m = 0; m < f.grid.modes(); ++m) part += std::norm(f.coeff(c, m));
    s += d(c) * part;
  }
  return f.grid.volume() * s;
}

/// max over modes of |q-components| of W_hat.
inline double max_flux_component(const WaveField& f) {
  double mx = 0.0;
  for (int c = kFlux; c < kDim; ++c)
    for (std::size_t m = 0; m < f.grid.modes(); ++m) mx = std::max(mx, std::abs(f.coeff(c, m)));
  return mx;
}

/// Pure transport W(x - v_e t): phase exp(-i t xi.v_e) per mode.
inline WaveField translation_reference(const WaveField& initial, const Vec3& v_e, double t) {
  WaveField out = initial;
  out.physical_current = false;
  out.physical.clear();
  for (std::size_t m = 0; m < initial.grid.modes(); ++m) {
    const cplx phase = std::polar(1.0, -t * initial.grid.xi(m).dot(v_e));
    for (int c = 0; c < kDim; ++c) out.coeff(c, m) *= phase;
  }
  return out;
}

/// max_x |U(x) - V(x)| over the physical grid.
inline double max_pointwise_difference(WaveField& u, WaveField& v) {
  u.synchronize_physical();
  v.synchronize_physical();
  double d = 0.0;
  for (std::size_t i = 0; i < u.physical.size(); ++i) d = std::max(d, std::abs(u.physical[i] - v.physical[i]));
  return d;
}

/// Modes whose coefficients are not all exactly zero.
inline std::vector<std::size_t> support(const WaveField& f) {
  std::vector<std::size_t> s;
  for (std::size_t m = 0; m < f.grid.modes(); ++m)
    if (!f.mode(m).isZero(0.0)) s.push_back(m);
  return s;
}

/// Flat dump of the real physical field:
///   "CATWAVE1", uint64 N1 N2 N3, uint64 components, float64 L1 L2 L3,
///   then float64 values ordered (component, i, j, k) with k fastest.
/// Everything little-endian.
inline void write_field_bin(const std::string& path, WaveField& f) {
  f.synchronize_physical();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  auto put_bytes = [&](const void* p, std::size_t n) {
    unsigned char buf[8];
    std::memcpy(buf, p, n);
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + n);
    os.write(reinterpret_cast<const char*>(buf), static_cast<std::streamsize>(n));
  };
  os.write("CATWAVE1", 8);
  const std::uint64_t n = static_cast<std::uint64_t>(f.grid.N), comps = kDim;
  for (int a = 0; a < 3; ++a) put_bytes(&n, 8);
  put_bytes(&comps, 8);
  for (double l : f.grid.L) put_bytes(&l, 8);
  for (const auto& z : f.physical) {
    const double re = z.real();
    put_bytes(&re, 8);
  }
  if (!os) throw NumericalError("failed while writing '" + path + "'");
}

/// Random field with conjugate-symmetric spectrum: one half of the lattice is
/// drawn, the other half mirrored; self-conjugate modes get real values and
/// Nyquist planes stay empty so that A(-xi) = -A(xi) holds on the support.
inline WaveField random_initial_data(const SpectralGrid& g, std::uint64_t seed,
                                     double amplitude = 1.0) {
  g.validate();
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, amplitude);
  WaveField f = WaveField::zeros(g);
  for (std::size_t m = 0; m < g.modes(); ++m) {
    if (g.is_nyquist(m)) continue;
    const std::size_t mm = g.mirror(m);
    if (mm < m) continue;
    for (int c = 0; c < kDim; ++c) {
      if (mm == m) {
        f.coeff(c, m) = n01(rng);
      } else {
        const cplx z(n01(rng), n01(rng));
        f.coeff(c, m) = z;
        f.coeff(c, mm) = std::conj(z);
      }
    }
  }
  return f;
}

/// d/dt of s0_energy at the current state: -2 L1 L2 L3 sum_k <S0 B W_hat, W_hat>.
/// The transport part drops out because S0 A(xi) is symmetric.
inline double s0_energy_rate(const WaveField& f, const LinearizedSystem& sys,
                             const ThermoClosure& closure) {
  const Mat8 sb = friedrichs_S0(sys.state.embed(), closure).m * sys.B;
  double s = 0.0;
  for (std::size_t m = 0; m < f.grid.modes(); ++m) {
    const auto v = f.mode(m);
    s += (v.adjoint() * sb.cast<cplx>() * v)(0, 0).real();
  }
  return -2.0 * f.grid.volume() * s;
}

struct DissipationSeries {
  std::vector<double> times;
  std::vector<double> s0;
  double initial_rate = 0.0;      // analytic d/dt s0_energy at t = 0
  double max_increase = -std::numeric_limits<double>::infinity();  // max_k E(t_{k+1}) - E(t_k)
  double zero_mode_error = 0.0;   // | q_hat(0, t) - exp(-t/tau) q_hat(0, 0) | over checkpoints
};

/// s0_energy of evolve(initial, t) at `checkpoints` equispaced times in
/// [0, t_end], together with the decay of the xi = 0 flux mode.
inline DissipationSeries dissipation_contrast(const WaveField& initial, const LinearizedSystem& sys,
                                              const ThermoClosure& closure, double t_end,
                                              int checkpoints, unsigned threads = 1) {
  if (checkpoints < 2) throw DomainError("dissipation_contrast: need at least 2 checkpoints");
  DissipationSeries out;
  out.initial_rate = s0_energy_rate(initial, sys, closure);
  for (int k = 0; k < checkpoints; ++k) {
    const double t = t_end * k / (checkpoints - 1);
    const WaveField w = evolve(initial, sys, t, threads);
    out.times.push_back(t);
    out.s0.push_back(s0_energy(w, sys.state, closure));
    if (k > 0) out.max_increase = std::max(out.max_increase, out.s0[k] - out.s0[k - 1]);
    const double decay = std::exp(-t / sys.tau);
    for (int c = kFlux; c < kDim; ++c) {
      out.zero_mode_error =
          std::max(out.zero_mode_error, std::abs(w.coeff(c, 0) - decay * initial.coeff(c, 0)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct WaveExperiment {
  SpectralGrid grid;
  BumpSpec bump;
  EquilibriumState state{1.0, Vec3(1.0, 0.0, 0.0), 1.0};
  double t_end = 10.0;
  int checkpoints = 101;  // including t = 0 and t = t_end
};

struct WaveSample {
  double t = 0.0;
  double l2 = 0.0;
  double s0 = 0.0;
  double max_q = 0.0;
  double translation_error = 0.0;  // max_x |evolve - translation_reference|
  double imaginary = 0.0;          // imaginary_fraction of the evolved field
};

struct WaveSeries {
  std::vector<WaveSample> samples;
  double l2_max_relative_deviation = 0.0;
  double max_q = 0.0;
  double max_translation_error = 0.0;
  double max_imaginary = 0.0;
  double conjugate_symmetry_error = 0.0;  // of the initial data
  std::size_t support_size = 0;
  WaveField initial;
  WaveField final_field;
};

inline WaveSeries run_wave_experiment(const WaveExperiment& ex, const ThermoClosure& closure,
                                      unsigned threads = 1) {
  if (ex.checkpoints < 2) throw DomainError("wave experiment: need at least 2 checkpoints");
  if (!(ex.t_end >= 0.0)) throw DomainError("wave experiment: t_end must be >= 0");
  const auto sys = linearize(ex.state, closure);
  WaveSeries out;
  out.initial = persistent_initial_data(ex.grid, ex.bump, ex.state);
  out.conjugate_symmetry_error = conjugate_symmetry_error(out.initial);
  out.support_size = support(out.initial).size();
  const double l2_0 = l2_norm(out.initial);
  for (int k = 0; k < ex.checkpoints; ++k) {
    WaveSample s;
    s.t = ex.t_end * k / (ex.checkpoints - 1);
    WaveField w = evolve(out.initial, sys, s.t, threads);
    WaveField ref = translation_reference(out.initial, ex.state.v, s.t);
    s.l2 = l2_norm(w);
    s.s0 = s0_energy(w, ex.state, closure);
    s.max_q = max_flux_component(w);
    s.translation_error = max_pointwise_difference(w, ref);
    s.imaginary = imaginary_fraction(w);
    out.l2_max_relative_deviation =
        std::max(out.l2_max_relative_deviation, std::abs(s.l2 - l2_0) / std::max(l2_0, 1e-300));
    out.max_q = std::max(out.max_q, s.max_q);
    out.max_translation_error = std::max(out.max_translation_error, s.translation_error);
    out.max_imaginary = std::max(out.max_imaginary, s.imaginary);
    out.samples.push_back(s);
    if (k + 1 == ex.checkpoints) out.final_field = std::move(w);
  }
  return out;
}

}  // namespace cattaneo
