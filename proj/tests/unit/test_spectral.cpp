#include <gtest/gtest.h>

#include <cmath>

#include "cattaneo/sampling.hpp"
#include "cattaneo/spectral.hpp"
#include "oracles/rational_gap.hpp"

using namespace cattaneo;
using oracle::Q;

namespace {

const FluidState kRef{1.0, Vec3::Zero(), 1.0, Vec3(1.0, 1.0, 1.0)};

}  // namespace

TEST(RationalOracle, ReferenceSpeedsAreExact) {
  // ideal gas at rho = theta = 1: p_rho = p_theta = kappa = tau = 1, e_theta = 3/2
  const auto s = oracle::speed_invariants(Q(1), Q(1), Q(1), Q(1), Q(3, 2), Q(1), Q(1));
  EXPECT_EQ(s.theta_sum, Q(7, 3));
  EXPECT_EQ(s.phi, Q(8, 3));
  EXPECT_EQ(s.z_plus_sq, Q(2));
  EXPECT_EQ(s.z_minus_sq, Q(1, 3));
}

TEST(RationalOracle, GapConstantsForStandardBox) {
  const auto g = oracle::exact_gap(Q(1, 2), Q(2), Q(1, 2), Q(2), Q(1, 2), Q(2), Q(1));
  EXPECT_EQ(g.delta1, Q(41, 128));
  EXPECT_EQ(g.delta2, Q(74));
  // delta3 = 0.25 / (sqrt(2) * 4 * 82), delta4 = (1/128) / sqrt(74)
  EXPECT_EQ(g.delta3_sq, Q(1, 16) / Q(2 * 328 * 328));
  EXPECT_EQ(g.delta4_sq, Q(1, 128 * 128) / Q(74));
}

TEST(RationalOracle, GapConstantsForPointBox) {
  const auto g = oracle::exact_gap(Q(1), Q(3, 2), Q(1), Q(1), Q(1), Q(1), Q(1));
  EXPECT_EQ(g.delta1, Q(7, 6));
}

TEST(CharSpeeds, ReferenceValues) {
  const auto r = char_speeds(Direction(1, 0, 0), kRef, ideal_gas());
  EXPECT_LE(std::abs(r.z_plus_sq - 2.0), 1e-14);
  EXPECT_LE(std::abs(r.z_minus_sq - 1.0 / 3.0), 1e-14);
  EXPECT_LE(std::abs(r.theta_sum - 7.0 / 3.0), 1e-14);
  EXPECT_LE(std::abs(r.phi - 8.0 / 3.0), 1e-14);
  EXPECT_EQ(r.eta0, 0.0);
  EXPECT_LE(std::abs(r.eta1 - std::sqrt(2.0)), 1e-14);
  EXPECT_LE(std::abs(r.eta4 + 1.0 / std::sqrt(3.0)), 1e-14);
}

TEST(CharSpeeds, VelocityShiftsAllSpeeds) {
  FluidState u = kRef;
  u.v = Vec3(1, 0, 0);
  const auto a = char_speeds(Direction(1, 0, 0), kRef, ideal_gas()).sorted_closed_form();
  const auto b = char_speeds(Direction(1, 0, 0), u, ideal_gas()).sorted_closed_form();
  for (int i = 0; i < 8; ++i) EXPECT_LE(std::abs(b[i] - a[i] - 1.0), 1e-14);
}

TEST(CharSpeeds, MatchesRationalOracleOverRationalStates) {
  // rational (rho, theta) pairs; the oracle needs Theta^2 - Phi to be a square,
  // so compare the squared speeds through the invariants instead.
  for (auto [rn, rd, tn, td] : {std::array{1, 2, 3, 2}, {2, 1, 1, 2}, {3, 4, 5, 3}}) {
    const Q rho(rn, rd), theta(tn, td);
    const Q th = theta + theta * rho * rho / (rho * rho * Q(3, 2)) + Q(1) / (rho * Q(3, 2));
    const Q phi = Q(4) * theta / (rho * Q(3, 2));
    FluidState u = kRef;
    u.rho = oracle::to_double(rho);
    u.theta = oracle::to_double(theta);
    const auto r = char_speeds(Direction(0, 1, 0), u, ideal_gas());
    EXPECT_LE(std::abs(r.theta_sum - oracle::to_double(th)), 1e-14);
    EXPECT_LE(std::abs(r.phi - oracle::to_double(phi)), 1e-14);
    EXPECT_LE(std::abs(r.z_plus_sq + r.z_minus_sq - r.theta_sum), 1e-13);
    EXPECT_LE(std::abs(4 * r.z_plus_sq * r.z_minus_sq - r.phi), 1e-13);
  }
}

TEST(CharSpeeds, DoubleRootDiscriminantIsClamped) {
  // p_rho = kappa / (rho e_theta tau) and p_theta -> 0 make Theta^2 - Phi
  // vanish up to rounding; the two acoustic pairs then coincide.
  auto c = ideal_gas(1.0, 1.0);
  c.p_theta = [](double, double) { return 1e-12; };
  const auto r = char_speeds(Direction(1, 0, 0), kRef, c);
  EXPECT_LE(std::abs(r.z_plus_sq - 1.0), 1e-10);
  EXPECT_LE(std::abs(r.z_minus_sq - 1.0), 1e-10);
}

TEST(Spectrum, NumericMatchesClosedFormAtReference) {
  const auto r = spectrum_report(Direction(1, 0, 0), kRef, ideal_gas());
  EXPECT_LE(r.pairing_error, 1e-10);
  const double want[] = {-std::sqrt(2.0), -1 / std::sqrt(3.0), 0, 0, 0, 0, 1 / std::sqrt(3.0),
                         std::sqrt(2.0)};
  for (int i = 0; i < 8; ++i) EXPECT_LE(std::abs(r.numeric[i] - cplx(want[i], 0.0)), 1e-10);
}

TEST(Spectrum, ZeroMatrix) {
  const auto s = spectrum_numeric(Mat8::Zero().eval());
  for (const auto& z : s.eigenvalues) EXPECT_EQ(std::abs(z), 0.0);
  EXPECT_LE(std::abs(s.condition - 1.0), 1e-12);
}

TEST(Spectrum, PairingErrorNeedsEightValues) {
  const auto r = char_speeds(Direction(1, 0, 0), kRef, ideal_gas());
  EXPECT_THROW(pairing_error(r, std::vector<cplx>(3)), DomainError);
}

TEST(Spectrum, EigenStructureOfJordanBlockIsIncomplete) {
  Eigen::Matrix2d j;
  j << 1, 1, 0, 1;
  const auto es = eigen_structure(j);
  ASSERT_EQ(es.clusters.size(), 1u);
  EXPECT_EQ(es.clusters[0].algebraic, 2);
  EXPECT_EQ(es.clusters[0].geometric, 1);
  EXPECT_FALSE(es.complete);
  EXPECT_EQ(diagonalizability_check(j).verdict, Diagonalizability::Defective);
}

TEST(Spectrum, RotationIsComplex) {
  Eigen::Matrix2d r;
  r << 0, -1, 1, 0;
  const auto d = diagonalizability_check(r);
  EXPECT_EQ(d.verdict, Diagonalizability::Complex);
  EXPECT_LE(std::abs(d.max_imag - 1.0), 1e-12);
}

TEST(Spectrum, SymmetricMatrixHasUnitCondition) {
  const Mat8 s0 = friedrichs_S0(kRef, ideal_gas()).m;
  const auto d = diagonalizability_check(s0);
  EXPECT_EQ(d.verdict, Diagonalizability::Diagonalizable);
  EXPECT_LE(std::abs(d.condition - 1.0), 1e-12);
}

TEST(Spectrum, MultiplicityProfileAtReference) {
  const auto p = multiplicity_profile(Direction(1, 0, 0), kRef, ideal_gas());
  ASSERT_EQ(p.size(), 5u);
  const double speeds[] = {-std::sqrt(2.0), -1 / std::sqrt(3.0), 0.0, 1 / std::sqrt(3.0),
                           std::sqrt(2.0)};
  const int mult[] = {1, 1, 4, 1, 1};
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE(std::abs(p[i].speed - speeds[i]), 1e-10);
    EXPECT_EQ(p[i].multiplicity, mult[i]);
  }
}

TEST(Spectrum, ProfileAndDiagonalizabilityAreStateIndependent) {
  Rng rng(5);
  StateSampler sampler;
  sampler.q_min = 0.1;
  double worst_cond = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const FluidState u = random_state(rng, sampler);
    const Direction xi(random_unit_vector(rng));
    EXPECT_NO_THROW(multiplicity_profile(xi, u, ideal_gas()));
    const auto d = diagonalizability_check(assemble_A(xi, u, ideal_gas()).m);
    EXPECT_EQ(d.verdict, Diagonalizability::Diagonalizable);
    worst_cond = std::max(worst_cond, d.condition);
  }
  EXPECT_TRUE(std::isfinite(worst_cond));
}

TEST(Spectrum, WrongToleranceGivesProfileMismatch) {
  // A huge cluster tolerance merges everything into one cluster.
  EXPECT_THROW(multiplicity_profile(Direction(1, 0, 0), kRef, ideal_gas(), 10.0), ProfileMismatch);
}

TEST(Spectrum, ChristovSymbolIsNotHyperbolicSomewhere) {
  Rng rng(9);
  StateSampler sampler;
  sampler.q_min = 0.2;
  bool found = false;
  for (int trial = 0; trial < 200 && !found; ++trial) {
    const FluidState u = random_state(rng, sampler);
    const Direction xi(random_unit_vector(rng));
    const auto d = diagonalizability_check(assemble_general(xi, u, ideal_gas(), -1.0, 1.0).m);
    found = d.verdict != Diagonalizability::Diagonalizable;
  }
  EXPECT_TRUE(found);
}

TEST(GapBounds, MatchRationalOracle) {
  const auto box = box_bounds(ideal_gas(), 0.5, 2.0, 0.5, 2.0);
  const auto g = gap_bounds(box, 1.0);
  const auto o = oracle::exact_gap(Q(1, 2), Q(2), Q(1, 2), Q(2), Q(1, 2), Q(2), Q(1));
  EXPECT_EQ(g.delta1, 0.3203125);
  EXPECT_LE(std::abs(g.delta1 - oracle::to_double(o.delta1)), 1e-16);
  EXPECT_LE(std::abs(g.delta2 - oracle::to_double(o.delta2)), 1e-13);
  EXPECT_LE(std::abs(g.delta3 - std::sqrt(oracle::to_double(o.delta3_sq))), 1e-17);
  EXPECT_LE(std::abs(g.delta4 - std::sqrt(oracle::to_double(o.delta4_sq))), 1e-17);
  EXPECT_EQ(g.delta, std::min({g.delta1, g.delta3, g.delta4}));
  EXPECT_NEAR(g.delta3, 5.3895e-4, 1e-7);
  EXPECT_NEAR(g.delta4, 9.0818e-4, 1e-7);
  EXPECT_TRUE(g.bounds_gap);
}

TEST(GapBounds, PointBox) {
  const auto g = gap_bounds(box_bounds(ideal_gas(), 1.0, 1.0, 1.0, 1.0), 1.0);
  EXPECT_LE(std::abs(g.delta1 - 7.0 / 6.0), 1e-15);
  // delta1 > 1 bounds z+^2 but not z+ itself.
  EXPECT_FALSE(g.bounds_gap);
}

TEST(GapBounds, InvalidBoxOrTau) {
  StateBox bad{1.0, 2.0, 1.0, 2.0, 0.0, 1.0};
  EXPECT_THROW(gap_bounds(bad, 1.0), DomainError);
  const auto box = box_bounds(ideal_gas(), 0.5, 2.0, 0.5, 2.0);
  EXPECT_THROW(gap_bounds(box, 0.0), DomainError);
}

TEST(GapBounds, InvariantsAndSoundnessOnSamples) {
  const auto box = box_bounds(ideal_gas(), 0.5, 2.0, 0.5, 2.0);
  const auto g = gap_bounds(box, 1.0);
  EXPECT_GE(g.delta2, g.delta1);
  EXPECT_GT(g.delta, 0.0);
  Rng rng(21);
  const StateSampler sampler;
  for (int trial = 0; trial < 500; ++trial) {
    const FluidState u = random_state(rng, sampler);
    const Direction xi(random_unit_vector(rng));
    const auto r = char_speeds(xi, u, ideal_gas());
    EXPECT_GE(r.z_plus_sq, g.delta1);
    EXPECT_LE(r.z_plus_sq, g.delta2);
    EXPECT_GE(r.z_minus_sq, g.delta3);
    EXPECT_GE(min_speed_gap(assemble_A(xi, u, ideal_gas()).m), g.delta);
  }
}

TEST(Spectrum, ChristovQuadrupleRootHasTwoEigenvectors) {
  // Independent of the eigensolver: rank of A - (xi.v) I by full-pivot LU.
  Rng rng(19);
  StateSampler sampler;
  sampler.q_min = 0.2;
  for (int trial = 0; trial < 20; ++trial) {
    const FluidState u = random_state(rng, sampler);
    const Direction xi(random_unit_vector(rng));
    const Mat8 a = assemble_general(xi, u, ideal_gas(), -1.0, 1.0).m;
    Eigen::FullPivLU<Mat8> lu(a - xi.xi().dot(u.v) * Mat8::Identity());
    lu.setThreshold(1e-10);
    EXPECT_EQ(lu.rank(), 6);
    const auto es = eigen_structure(a);
    int quadruple = 0;
    for (const auto& c : es.clusters)
      if (c.algebraic == 4) {
        ++quadruple;
        EXPECT_EQ(c.geometric, 2);
      }
    EXPECT_EQ(quadruple, 1);
  }
}
