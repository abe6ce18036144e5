#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cattaneo/coupling.hpp"
#include "cattaneo/sampling.hpp"
#include "cattaneo/waves.hpp"

using namespace cattaneo;

namespace {

const EquilibriumState kVe{1.0, Vec3(1.0, 0.0, 1.0), 1.0};
const EquilibriumState kRest{1.0, Vec3::Zero(), 1.0};

}  // namespace

// ---------------------------------------------------------------------------
// coupling

TEST(Equilibrium, Classification) {
  EXPECT_FALSE(is_equilibrium(FluidState{1.0, Vec3::Zero(), 1.0, Vec3(1, 1, 1)}));
  EXPECT_TRUE(is_equilibrium(FluidState{2.0, Vec3(1, 2, 3), 0.5, Vec3::Zero()}));
  EXPECT_TRUE(is_equilibrium(FluidState{1.0, Vec3::Zero(), 1.0, Vec3(1e-16, 0, 0)}, 1e-12));
}

TEST(Linearize, SymbolAndRelaxation) {
  const auto sys = linearize(kVe, ideal_gas());
  Mat8 want = Mat8::Zero();
  want(0, 1) = want(1, 0) = want(1, 4) = want(5, 4) = 1.0;
  want(4, 1) = want(4, 5) = 2.0 / 3.0;
  want.diagonal().setConstant(1.0);  // xi . v_e for xi = e1
  EXPECT_LE((sys.symbol(Vec3::UnitX()) - want).cwiseAbs().maxCoeff(), 1e-15);

  Vec8 d = Vec8::Zero();
  d.tail<3>().setOnes();
  EXPECT_EQ(sys.B, Eigen::MatrixXd(Mat8(d.asDiagonal())));

  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vec3 xi = 3.0 * random_unit_vector(rng);
    EXPECT_LE((sys.symbol(xi) - assemble_A(Direction(xi), kVe.embed(), ideal_gas()).m).cwiseAbs().maxCoeff(),
              1e-14);
  }
  EXPECT_THROW(linearize(EquilibriumState{-1.0, Vec3::Zero(), 1.0}, ideal_gas()), DomainError);
}

TEST(Linearize, OneDimensionalReduction) {
  const auto sys = reduce_1d(kVe, ideal_gas());
  ASSERT_EQ(sys.n, 4);
  Eigen::Matrix4d want = Eigen::Matrix4d::Identity();
  want(0, 1) = want(1, 0) = want(1, 2) = want(3, 2) = 1.0;
  want(2, 1) = want(2, 3) = 2.0 / 3.0;
  EXPECT_LE((sys.A[0] - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(sys.B(3, 3), 1.0);
  EXPECT_EQ(sys.B.cwiseAbs().sum(), 1.0);
  EXPECT_THROW(reduce_1d(EquilibriumState{1.0, Vec3::Zero(), 0.0}, ideal_gas()), DomainError);
}

TEST(Coupling, ThreeDimensionalSystemViolatesCouplingEverywhere) {
  const auto sys = linearize(kVe, ideal_gas());
  for (const Vec3& xi : icosphere(1)) {
    const auto r = genuinely_coupled(sys, xi);
    ASSERT_TRUE(r.violated);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_LE(r.witness->kernel_residual, 1e-12);
    EXPECT_LE(r.witness->eigen_residual, 1e-12);
    EXPECT_NEAR(r.witness->mu, xi.dot(kVe.v), 1e-12);
    EXPECT_LE(std::abs(r.witness->Z.norm() - 1.0), 1e-14);
  }
}

TEST(Coupling, ClosedFormWitnessAtE1) {
  const auto sys = linearize(kRest, ideal_gas());
  const auto w = kernel_witness(sys, Vec3::UnitX());
  Eigen::VectorXd want = Eigen::VectorXd::Zero(8);
  want(2) = 1.0;
  EXPECT_EQ(w.Z, want);
  EXPECT_EQ(w.mu, 0.0);
  EXPECT_EQ(w.kernel_residual, 0.0);
  EXPECT_EQ(w.eigen_residual, 0.0);
}

TEST(Coupling, ClosedFormWitnessIsOrthogonalEverywhere) {
  const auto sys = linearize(kVe, ideal_gas());
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const Vec3 xi = random_unit_vector(rng);
    const auto w = kernel_witness(sys, xi);
    EXPECT_LE(std::abs(w.Z.segment<3>(kVel).dot(xi)), 1e-15);
    EXPECT_LE(w.eigen_residual, 1e-14);
  }
  EXPECT_THROW(kernel_witness(reduce_1d(kVe, ideal_gas()), Vec3::UnitX()), DomainError);
}

TEST(Coupling, OneDimensionalSystemIsCoupled) {
  const auto sys = reduce_1d(kVe, ideal_gas());
  for (double r : log_space(0.1, 10.0, 16)) {
    const auto res = genuinely_coupled(sys, Vec3(r, 0, 0));
    EXPECT_FALSE(res.violated) << "xi = " << r;
    EXPECT_GT(res.margin, 1e-6);
  }
  EXPECT_THROW(genuinely_coupled(sys, Vec3::Zero()), DomainError);
}

TEST(Coupling, WitnessBranchClosedForm) {
  const auto branch = witness_branch(Direction(1, 0, 0), Vec3::UnitZ(), kRest.v);
  const auto p = branch(Vec3::UnitX());
  EXPECT_EQ(p.h, Vec3(0, -1, 0));
  EXPECT_EQ(branch.defining_residuals(Vec3::UnitX()), Vec3::Zero());
  const Vec3 xi(1.0, 0.1, 0.0);
  const Vec3 h = branch(xi).h;
  EXPECT_LE(std::abs(xi.dot(h)), 1e-15);
  EXPECT_LE(std::abs(branch.probe().dot(h)), 1e-15);
  EXPECT_THROW(branch(Vec3::UnitZ()), DegenerateDirection);
  EXPECT_THROW(witness_branch(Direction(1, 0, 0), Vec3(1, 1, 0), kRest.v), DomainError);
}

TEST(Coupling, WitnessBranchIsAnEigenvectorInKerB) {
  const auto sys = linearize(kVe, ideal_gas());
  const auto branch = witness_branch(Direction(1, 0, 0), std::nullopt, kVe.v);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const Vec3 xi(1.0, -0.2 + 0.4 * i / 9, -0.2 + 0.4 * j / 9);
      const auto p = branch(xi);
      const Eigen::VectorXd z = p.Z;
      EXPECT_LE((sys.symbol(xi) * z - p.mu * z).norm(), 1e-13);
      EXPECT_LE((sys.B * z).norm(), 1e-13);
    }
}

TEST(Sweep, IcosphereSize) {
  EXPECT_EQ(icosphere(0).size(), 12u);
  EXPECT_EQ(icosphere(2).size(), 162u);
  for (const auto& v : icosphere(2)) EXPECT_LE(std::abs(v.norm() - 1.0), 1e-15);
}

TEST(Sweep, LogSpaceEndpoints) {
  const auto r = log_space(0.1, 10.0, 64);
  ASSERT_EQ(r.size(), 64u);
  EXPECT_NEAR(r.front(), 0.1, 1e-15);
  EXPECT_NEAR(r.back(), 10.0, 1e-13);
  EXPECT_THROW(log_space(0.0, 1.0, 4), DomainError);
}

TEST(Sweep, ThreeDimensionalSystemIsNotStrictlyDissipative) {
  const auto sys = linearize(kVe, ideal_gas());
  const auto s = dissipativity_sweep(sys, icosphere(1), log_space(1e-2, 1e2, 8), 2);
  EXPECT_LE(std::abs(s.max_re), 1e-12);
  EXPECT_FALSE(s.strictly_dissipative);
  const Vec3 xi = s.points[s.argmax].xi;
  EXPECT_LE(std::abs(s.argmax_eigenvalue - cplx(0.0, -xi.dot(kVe.v))), 1e-10);
  for (const auto& p : s.points) EXPECT_LE(p.max_re, 1e-12);
}

TEST(Sweep, OneDimensionalSystemIsStrictlyDissipative) {
  const auto s = default_dissipativity_sweep(reduce_1d(kVe, ideal_gas()));
  EXPECT_EQ(s.points.size(), 64u);
  EXPECT_TRUE(s.strictly_dissipative);
  EXPECT_LT(s.max_re, -1e-10);
}

TEST(Sweep, ZeroFrequencyLimit) {
  const auto sys = linearize(kRest, ideal_gas());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sys.generator(Vec3::Zero()));
  int zeros = 0, decaying = 0;
  for (const auto& z : es.eigenvalues()) {
    if (std::abs(z) < 1e-15) ++zeros;
    if (std::abs(z + 1.0) < 1e-15) ++decaying;
  }
  EXPECT_EQ(zeros, 5);
  EXPECT_EQ(decaying, 3);
  EXPECT_THROW(dissipativity_sweep(sys, {Vec3::UnitX()}, {0.0}), DomainError);
}

// ---------------------------------------------------------------------------
// waves

TEST(Grid, ValidationAndIndexing) {
  EXPECT_THROW(SpectralGrid(12, {1, 1, 1}), DomainError);
  EXPECT_THROW(SpectralGrid(8, {1, 0, 1}), DomainError);
  const SpectralGrid g(8, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const auto p = g.unflat(m);
    EXPECT_EQ(g.flat(p[0], p[1], p[2]), m);
    if (!g.is_nyquist(m)) {
      EXPECT_EQ(g.xi(g.mirror(m)), -g.xi(m));
    }
    EXPECT_EQ(g.mirror(g.mirror(m)), m);
  }
}

TEST(Grid, TransformRoundTrip) {
  const SpectralGrid g(8, {1.0, 2.0, 3.0});
  WaveField f = random_initial_data(g, 3);
  const auto spectral = f.spectral;
  f.synchronize_physical();
  const WaveField back = from_physical(g, f.physical);
  double err = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    err = std::max(err, std::abs(back.spectral[i] - spectral[i]));
    mag = std::max(mag, std::abs(spectral[i]));
  }
  EXPECT_LE(err / mag, 1e-12);
  EXPECT_LE(conjugate_symmetry_error(f), 0.0);
  EXPECT_LE(imaginary_fraction(f), 1e-12);
}

TEST(Norms, ZeroFieldAndParseval) {
  const SpectralGrid g(8, {1.0, 2.0, 3.0});
  const WaveField zero = WaveField::zeros(g);
  EXPECT_EQ(l2_norm(zero), 0.0);

  // cos(2 pi x / L1) in the density: L2^2 = L1 L2 L3 / 2
  WaveField f = WaveField::zeros(g);
  const std::size_t m = g.flat(1, 0, 0);
  f.coeff(kRho, m) = 0.5;
  f.coeff(kRho, g.mirror(m)) = 0.5;
  EXPECT_NEAR(l2_norm_squared(f), g.volume() / 2, 1e-14);

  // the same value by quadrature on the physical grid
  f.synchronize_physical();
  double quad = 0.0;
  for (const auto& z : f.physical) quad += std::norm(z);
  quad *= g.volume() / static_cast<double>(g.modes());
  EXPECT_NEAR(quad, g.volume() / 2, 1e-13);
}

TEST(Bump, ProfileExamples) {
  const BumpSpec b;
  EXPECT_EQ(bump(b, b.center), 1.0);
  EXPECT_EQ(bump(b, b.center + Vec3(b.r_outer, 0, 0)), 0.0);
  const double mid = bump(b, b.center + Vec3(0.5 * (b.r_inner + b.r_outer), 0, 0));
  EXPECT_GT(mid, 0.0);
  EXPECT_LT(mid, 1.0);
  double prev = 1.0;
  for (int k = 0; k <= 50; ++k) {
    const double r = b.r_inner + (b.r_outer - b.r_inner) * k / 50.0;
    const double v = bump(b, b.center + Vec3(0, r, 0));
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Bump, Validation) {
  const SpectralGrid g;
  BumpSpec off_lattice;
  off_lattice.center = Vec3(3.5, 0, 0);
  EXPECT_THROW(validate_bump(g, off_lattice), DomainError);
  BumpSpec too_wide;
  too_wide.r_outer = 4.0;
  EXPECT_THROW(validate_bump(g, too_wide), DomainError);
  BumpSpec inverted;
  inverted.r_inner = 3.0;
  EXPECT_THROW(validate_bump(g, inverted), DomainError);
  EXPECT_NO_THROW(validate_bump(g, BumpSpec{}));
}

TEST(PersistentData, SinglePlaneWavePair) {
  const SpectralGrid g(16, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  BumpSpec b;
  b.r_inner = 0.3;
  b.r_outer = 0.6;
  const WaveField f = persistent_initial_data(g, b, kRest);
  const auto s = support(f);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(g.xi(s[0]), -g.xi(s[1]));
}

TEST(PersistentData, IsRealAndInKerB) {
  const SpectralGrid g;
  const WaveField f = persistent_initial_data(g, BumpSpec{}, kVe);
  EXPECT_EQ(conjugate_symmetry_error(f), 0.0);
  EXPECT_EQ(max_flux_component(f), 0.0);
  EXPECT_GT(support(f).size(), 2u);
}

TEST(Evolve, TimeZeroIsIdentity) {
  const SpectralGrid g(8, {1.0, 1.0, 1.0});
  const WaveField f = random_initial_data(g, 1);
  EXPECT_EQ(evolve(f, linearize(kVe, ideal_gas()), 0.0).spectral, f.spectral);
}

TEST(Evolve, KernelModeIsStationaryAtRest) {
  const SpectralGrid g(8, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  WaveField f = WaveField::zeros(g);
  const std::size_t m = g.flat(1, 0, 0);
  f.coeff(2, m) = 1.0;
  f.coeff(2, g.mirror(m)) = 1.0;
  const auto sys = linearize(kRest, ideal_gas());
  for (double t : {0.5, 3.0, 10.0}) {
    const WaveField w = evolve(f, sys, t);
    double err = 0.0;
    for (std::size_t i = 0; i < f.spectral.size(); ++i) err = std::max(err, std::abs(w.spectral[i] - f.spectral[i]));
    EXPECT_LE(err, 1e-13) << "t = " << t;
  }
}

TEST(Evolve, ZeroModeFluxRelaxes) {
  const SpectralGrid g(4, {1.0, 1.0, 1.0});
  WaveField f = WaveField::zeros(g);
  f.coeff(kFlux, 0) = 1.0;
  const WaveField w = evolve(f, linearize(kRest, ideal_gas()), 1.0);
  EXPECT_LE(std::abs(w.coeff(kFlux, 0) - std::exp(-1.0)), 1e-14);
}

TEST(Evolve, SupportNeverGrowsAndRealnessIsKept) {
  const SpectralGrid g;
  const WaveField f = persistent_initial_data(g, BumpSpec{}, kVe);
  WaveField w = evolve(f, linearize(kVe, ideal_gas()), 2.3, 2);
  EXPECT_EQ(support(w), support(f));
  EXPECT_LE(imaginary_fraction(w), 1e-12);
}

TEST(Evolve, RejectsOneDimensionalSystem) {
  const SpectralGrid g(4, {1.0, 1.0, 1.0});
  EXPECT_THROW(evolve(WaveField::zeros(g), reduce_1d(kVe, ideal_gas()), 1.0), DomainError);
}

TEST(Translation, IdentityAtRestAndExactForPersistentData) {
  const SpectralGrid g;
  const WaveField f = persistent_initial_data(g, BumpSpec{}, kRest);
  EXPECT_EQ(translation_reference(f, Vec3::Zero(), 4.0).spectral, f.spectral);

  const EquilibriumState moving{1.0, Vec3(1.0, 0.0, 0.0), 1.0};
  const WaveField p = persistent_initial_data(g, BumpSpec{}, moving);
  WaveField w = evolve(p, linearize(moving, ideal_gas()), 0.7);
  WaveField ref = translation_reference(p, moving.v, 0.7);
  EXPECT_LE(max_pointwise_difference(w, ref), 1e-10);
}

TEST(Translation, FailsForDataWithFlux) {
  const SpectralGrid g(8, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  const EquilibriumState moving{1.0, Vec3(1.0, 0.0, 0.0), 1.0};
  const WaveField f = random_initial_data(g, 5);
  WaveField w = evolve(f, linearize(moving, ideal_gas()), 0.7);
  WaveField ref = translation_reference(f, moving.v, 0.7);
  EXPECT_GT(max_pointwise_difference(w, ref), 1e-3);
}

TEST(Translation, PhysicalShiftOfAPlaneWave) {
  // density cos(x): translation by v t must give cos(x - v t) on the grid
  const SpectralGrid g(8, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  WaveField f = WaveField::zeros(g);
  const std::size_t m = g.flat(1, 0, 0);
  f.coeff(kRho, m) = 0.5;
  f.coeff(kRho, g.mirror(m)) = 0.5;
  WaveField shifted = translation_reference(f, Vec3(1.0, 0.0, 0.0), 0.4);
  shifted.synchronize_physical();
  const double h = 2 * std::numbers::pi / g.N;
  for (int i = 0; i < g.N; ++i)
    EXPECT_NEAR(shifted.physical[g.flat(i, 0, 0)].real(), std::cos(i * h - 0.4), 1e-14);
}

TEST(Energy, S0EnergyRateMatchesDifferenceQuotient) {
  const SpectralGrid g(4, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  const auto sys = linearize(kVe, ideal_gas());
  const WaveField f = random_initial_data(g, 9, 0.1);
  const double h = 1e-5;
  const double fd = (s0_energy(evolve(f, sys, h), kVe, ideal_gas()) -
                     s0_energy(evolve(f, sys, -h), kVe, ideal_gas())) /
                    (2 * h);
  const double rate = s0_energy_rate(f, sys, ideal_gas());
  EXPECT_LT(rate, 0.0);
  EXPECT_NEAR(fd, rate, 1e-6 * std::abs(rate));
}

TEST(Energy, DissipationContrastDecreases) {
  const SpectralGrid g(4, {2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi});
  const auto sys = linearize(kVe, ideal_gas());
  const WaveField f = random_initial_data(g, 13);
  const auto d = dissipation_contrast(f, sys, ideal_gas(), 2.0, 21);
  EXPECT_LT(d.initial_rate, 0.0);
  EXPECT_LT(d.max_increase, 0.0);
  EXPECT_LE(d.zero_mode_error, 1e-12);
  EXPECT_THROW(dissipation_contrast(f, sys, ideal_gas(), 1.0, 1), DomainError);
}

TEST(Output, FieldDumpLayout) {
  const SpectralGrid g(4, {1.0, 2.0, 3.0});
  WaveField f = random_initial_data(g, 2);
  const auto path = std::filesystem::temp_directory_path() / "cattaneo_field_test.bin";
  write_field_bin(path.string(), f);
  std::ifstream is(path, std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "CATWAVE1");
  std::uint64_t header[4];
  is.read(reinterpret_cast<char*>(header), sizeof header);
  EXPECT_EQ(header[0], 4u);
  EXPECT_EQ(header[3], 8u);
  double lengths[3];
  is.read(reinterpret_cast<char*>(lengths), sizeof lengths);
  EXPECT_EQ(lengths[2], 3.0);
  double first;
  is.read(reinterpret_cast<char*>(&first), sizeof first);
  EXPECT_EQ(first, f.physical[0].real());
  EXPECT_EQ(std::filesystem::file_size(path), 8 + 4 * 8 + 3 * 8 + 8 * 64 * 8u);
  std::filesystem::remove(path);
}
