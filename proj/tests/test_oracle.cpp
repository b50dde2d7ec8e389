#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "support/quadrature_oracle.hpp"
#include "wigner/oracle.hpp"

using namespace wigner;
using namespace wigner::oracle;

namespace {

const PhaseSpaceGrid kGrid = make_grid(-16, 16, 256, -4.8, 4.8, 256);
// Wide enough that the s-integral of the direct transform is not cut short by the lattice edge.
const PhaseSpaceGrid kWide = make_grid(-32, 32, 512, -4.8, 4.8, 256);

const EigenSolution& sigma3() {
  static const EigenSolution sol = solve(make_basis(1.0, 10), 3.0);
  return sol;
}

}  // namespace

TEST(GaussianBasis, RejectsBadParameters) {
  EXPECT_THROW(make_basis(0.0, 10), std::invalid_argument);
  EXPECT_THROW(make_basis(-1.0, 10), std::invalid_argument);
  EXPECT_THROW(make_basis(1.0, 1), std::invalid_argument);
  EXPECT_DOUBLE_EQ(make_basis(0.5, 4).beta_sq(3), 1.5);
}

TEST(OverlapMatrix, UnitDiagonalAndSymmetric) {
  const auto B = overlap_matrix(make_basis(1.0, 20));
  for (int n = 0; n < 20; ++n) {
    EXPECT_DOUBLE_EQ(B(n, n), 1.0);
    for (int m = 0; m < 20; ++m) EXPECT_DOUBLE_EQ(B(n, m), B(m, n));
  }
  EXPECT_NEAR(B(0, 1), std::sqrt(2.0 * std::sqrt(2.0) / 3.0), 1e-15);
  EXPECT_NEAR(B(0, 1), 0.97098, 5e-6);
}

TEST(KineticMatrix, ClosedFormValues) {
  const auto basis = make_basis(1.0, 20);
  const auto T = kinetic_matrix(basis);
  for (int n = 0; n < 20; ++n) {
    EXPECT_NEAR(T(n, n), 1.0 / (4.0 * basis.beta_sq(n + 1)), 1e-15);
    for (int m = 0; m < 20; ++m) EXPECT_GT(T(n, m), 0.0);
  }
  EXPECT_NEAR(T(0, 1), 0.97098 / 6.0, 1e-6);
}

TEST(PotentialMatrix, ClosedFormValues) {
  const auto basis = make_basis(1.0, 20);
  const auto V = potential_matrix(basis, 3.0);
  EXPECT_NEAR(V(0, 0), -std::sqrt(9.0 / 9.5), 1e-15);
  EXPECT_NEAR(V(0, 0), -0.97333, 5e-6);
  for (int n = 0; n < 20; ++n)
    for (int m = 0; m < 20; ++m) {
      EXPECT_LT(V(n, m), 0.0);
      EXPECT_DOUBLE_EQ(V(n, m), V(m, n));
    }
  const auto B = overlap_matrix(basis);
  const auto Vflat = potential_matrix(basis, 1e8);
  EXPECT_LT((Vflat + B).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(potential_matrix(basis, 0.0), std::invalid_argument);
}

TEST(MatrixElements, AgreeWithQuadratureUpToTwentyFunctions) {
  const auto basis = make_basis(1.0, 20);
  const auto B = overlap_matrix(basis);
  const auto T = kinetic_matrix(basis);
  const auto V = potential_matrix(basis, 3.0);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 20; ++n) {
    for (std::size_t m = n; m <= 20; ++m) {
      const double a = basis.beta_sq(n), b = basis.beta_sq(m);
      const auto r = static_cast<Eigen::Index>(n - 1), c = static_cast<Eigen::Index>(m - 1);
      worst = std::max(worst, std::abs(B(r, c) - quad::overlap(a, b)) / std::abs(B(r, c)));
      worst = std::max(worst, std::abs(T(r, c) - quad::kinetic(a, b)) / std::abs(T(r, c)));
      worst = std::max(worst, std::abs(V(r, c) - quad::potential(a, b, 3.0)) / std::abs(V(r, c)));
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Solve, ReproducesLowestEvenEnergies) {
  const auto& sol = sigma3();
  EXPECT_NEAR(sol.energies(0), -0.844, 0.002);
  EXPECT_NEAR(sol.energies(1), -0.312, 0.002);
  for (Eigen::Index l = 1; l < sol.energies.size(); ++l) EXPECT_LE(sol.energies(l - 1), sol.energies(l));
}

TEST(Solve, ResidualAndNormalization) {
  const auto& sol = sigma3();
  for (std::size_t l = 0; l < sol.size(); ++l) {
    EXPECT_LT(sol.residual(l), 1e-8) << "state " << l;
  }
  // Upper states carry coefficients near 1e6, so a^T B a is only good to ~1e-4 in
  // double precision; the two bound states are checked tightly.
  for (Eigen::Index l = 0; l < 2; ++l) {
    const Eigen::VectorXd a = sol.coeffs.col(l);
    EXPECT_NEAR(a.dot(sol.overlap * a), 1.0, 1e-8) << "state " << l;
  }
  EXPECT_GE(sol.min_pivot, min_cholesky_pivot);
}

TEST(Solve, EigenfunctionsArePositiveAtOrigin) {
  const auto& sol = sigma3();
  for (std::size_t l = 0; l < sol.size(); ++l) EXPECT_GT(eigenfunction(sol, l, 0.0), 0.0);
}

TEST(Solve, EigenfunctionNormMatchesQuadrature) {
  const auto& sol = sigma3();
  for (std::size_t l = 0; l < 2; ++l) {
    const double n = quad::trapezoid([&](double x) { return std::pow(eigenfunction(sol, l, x), 2); }, 60.0, 0.01);
    EXPECT_NEAR(n, 1.0, 1e-8);
  }
}

TEST(Solve, DeepFlatWellApproachesMinusOne) {
  const auto sol = solve(make_basis(1.0, 10), 200.0);
  EXPECT_GT(sol.energies(0), -1.0);
  EXPECT_LT(sol.energies(0), -0.99);
}

TEST(Solve, GroundEnergyNonIncreasingInBasisSize) {
  double previous = 0.0;
  for (std::size_t n = 2; n <= 11; ++n) {
    const double e0 = solve(make_basis(1.0, n), 3.0).energies(0);
    if (n > 2) EXPECT_LE(e0, previous + 1e-12) << "n_max " << n;
    previous = e0;
  }
}

TEST(Solve, IllConditionedBasisFailsLoudly) {
  try {
    solve(make_basis(1.0, 20), 3.0);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("pivot"), std::string::npos);
  }
}

TEST(WignerBasis, DiagonalIsRealGaussian) {
  const auto basis = make_basis(1.0, 10);
  for (std::size_t n : {1u, 4u, 10u}) {
    const double b = basis.beta_sq(n);
    for (double x : {-1.3, 0.0, 2.0})
      for (double p : {-0.7, 0.0, 0.4}) {
        const auto f = wigner_basis(n, n, x, p, basis);
        EXPECT_NEAR(f.imag(), 0.0, 1e-15);
        EXPECT_NEAR(f.real(), 2.0 * std::exp(-x * x / b - p * p * b), 1e-14);
      }
  }
  EXPECT_DOUBLE_EQ(wigner_basis(3, 3, 0.0, 0.0, basis).real(), 2.0);
}

TEST(WignerBasis, HermitianInLabels) {
  const auto basis = make_basis(1.0, 10);
  for (std::size_t n = 1; n <= 10; n += 3)
    for (std::size_t m = 1; m <= 10; m += 2) {
      const auto a = wigner_basis(n, m, 0.7, -0.3, basis);
      const auto b = wigner_basis(m, n, 0.7, -0.3, basis);
      EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-14);
    }
  EXPECT_THROW(wigner_basis(0, 1, 0, 0, basis), std::out_of_range);
  EXPECT_THROW(wigner_basis(1, 11, 0, 0, basis), std::out_of_range);
}

TEST(WignerBasis, MatchesDirectSIntegral) {
  const auto basis = make_basis(1.0, 10);
  const auto f = wigner_basis(1, 2, 0.5, 0.3, basis);
  const auto q = quad::cross_wigner(1.0, 2.0, 0.5, 0.3);
  EXPECT_LT(std::abs(f - q), 1e-8);
  for (std::size_t n = 1; n <= 10; n += 3)
    for (std::size_t m = 1; m <= 10; m += 4) {
      const auto g = wigner_basis(n, m, -1.1, 0.8, basis);
      EXPECT_LT(std::abs(g - quad::cross_wigner(basis.beta_sq(n), basis.beta_sq(m), -1.1, 0.8)), 1e-8);
    }
}

TEST(SuperpositionState, AmplitudesMustBeNormalized) {
  EXPECT_THROW(SuperpositionState(sigma3(), {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(SuperpositionState(sigma3(), {}), std::invalid_argument);
  EXPECT_NO_THROW(SuperpositionState::normalized(sigma3(), {1.0, 1.0}));
  EXPECT_THROW(SuperpositionState::normalized(sigma3(), {0.0, 0.0}), std::invalid_argument);
}

TEST(WignerAt, StationaryStateIsTimeIndependent) {
  const SuperpositionState ground(sigma3(), {1.0});
  for (double t : {0.5, 3.0, 17.0}) EXPECT_NEAR(wigner_at(ground, t, 0.4, -0.2), wigner_at(ground, 0.0, 0.4, -0.2), 1e-13);
}

TEST(WignerAt, ImaginaryResidueVanishesOnLattice) {
  const auto state = two_state_superposition(sigma3());
  const auto g = make_grid(-16, 16, 32, -4.8, 4.8, 32);
  double worst = 0.0;
  for (double t : {0.0, 1.7, 3.0})
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.np; ++j) worst = std::max(worst, std::abs(wigner_complex(state, t, g.x(i), g.p(j)).imag()));
  EXPECT_LT(worst, 1e-10);
}

TEST(SampleField, NormIsTwoPi) {
  const auto f = sample_field(two_state_superposition(sigma3()), 0.0, kGrid);
  EXPECT_NEAR(norm(f), 2.0 * std::numbers::pi, 1e-4);
  const auto g0 = sample_field(SuperpositionState(sigma3(), {1.0}), 0.0, kGrid);
  EXPECT_NEAR(norm(g0), 2.0 * std::numbers::pi, 1e-4);
}

TEST(SampleField, AgreesWithPointwiseDoubleSum) {
  const auto state = two_state_superposition(sigma3());
  const auto f = sample_field(state, 3.0, kGrid);
  for (std::size_t i = 0; i < kGrid.nx; i += 37)
    for (std::size_t j = 0; j < kGrid.np; j += 29)
      EXPECT_NEAR(f(i, j), wigner_at(state, 3.0, kGrid.x(i), kGrid.p(j)), 1e-9);
}

TEST(SampleField, PeriodicInBeatPeriod) {
  const auto& sol = sigma3();
  const auto state = two_state_superposition(sol);
  const double period = 2.0 * std::numbers::pi / (sol.energies(1) - sol.energies(0));
  const auto g = make_grid(-16, 16, 64, -4.8, 4.8, 64);
  const auto a = sample_field(state, 1.3, g);
  const auto b = sample_field(state, 1.3 + period, g);
  EXPECT_LT(diff_metrics(a, b).linf, 1e-6);
}

TEST(SampleField, MarginalMatchesWavefunction) {
  const auto state = two_state_superposition(sigma3());
  const auto f = sample_field(state, 0.0, kGrid);
  const auto rho = marginal_x(f);
  const auto psi = wavefunction_on_lattice(state, 0.0, kGrid);
  for (std::size_t i = 0; i < kGrid.nx; ++i) EXPECT_NEAR(rho[i], std::norm(psi[i]), 1e-4);

  const SuperpositionState ground(sigma3(), {1.0});
  const auto r0 = marginal_x(sample_field(ground, 0.0, kGrid));
  const auto p0 = wavefunction_on_lattice(ground, 0.0, kGrid);
  for (std::size_t i = 0; i < kGrid.nx; ++i) EXPECT_NEAR(r0[i], std::norm(p0[i]), 1e-4);
  for (std::size_t i = 1; i < kGrid.nx / 2; ++i) EXPECT_NEAR(r0[i], r0[kGrid.nx - i], 1e-12);
}

TEST(NumericWigner, GaussianGroundState) {
  const double beta_sq = 2.0;
  std::vector<std::complex<double>> psi(kGrid.nx);
  for (std::size_t i = 0; i < kGrid.nx; ++i) psi[i] = quad::gaussian_psi(beta_sq, kGrid.x(i));
  const auto f = numeric_wigner(psi, kGrid);
  double worst = 0.0;
  for (std::size_t i = 0; i < kGrid.nx; ++i)
    for (std::size_t j = 0; j < kGrid.np; ++j) {
      const double x = kGrid.x(i), p = kGrid.p(j);
      worst = std::max(worst, std::abs(f(i, j) - 2.0 * std::exp(-x * x / beta_sq - p * p * beta_sq)));
    }
  EXPECT_LT(worst, 1e-6);
}

TEST(NumericWigner, AgreesWithSampleFieldOnSuperposition) {
  const auto state = two_state_superposition(sigma3());
  for (double t : {0.0, 3.0}) {
    const auto psi = wavefunction_on_lattice(state, t, kWide);
    const auto f = numeric_wigner(psi, kWide, t);
    EXPECT_LT(diff_metrics(f, sample_field(state, t, kWide)).linf, 1e-6) << "t " << t;
  }
}

TEST(NumericWigner, RealEvenWavefunctionGivesEvenMomentumProfile) {
  const auto psi = wavefunction_on_lattice(two_state_superposition(sigma3()), 0.0, kWide);
  const auto f = numeric_wigner(psi, kWide);
  // p_j and p_{np-j} are mirror images about p = 0 on this lattice.
  for (std::size_t i = 0; i < kWide.nx; i += 7)
    for (std::size_t j = 1; j < kWide.np; ++j) EXPECT_NEAR(f(i, j), f(i, kWide.np - j), 1e-12);
}

TEST(NumericCrossWigner, MatchesAnalyticBasisPairs) {
  const auto basis = make_basis(1.0, 10);
  std::vector<std::vector<std::complex<double>>> psi(11);
  for (std::size_t n = 1; n <= 10; ++n) {
    psi[n].resize(kWide.nx);
    for (std::size_t i = 0; i < kWide.nx; ++i) psi[n][i] = basis_function(basis, n, kWide.x(i));
  }
  double worst = 0.0;
  for (std::size_t n = 1; n <= 10; n += 3)
    for (std::size_t m = 1; m <= 10; m += 3) {
      const auto num = numeric_cross_wigner(psi[n], psi[m], kWide);
      for (std::size_t i = 0; i < kWide.nx; ++i)
        for (std::size_t j = 0; j < kWide.np; ++j)
          worst = std::max(worst, std::abs(num[i * kWide.np + j] - wigner_basis(n, m, kWide.x(i), kWide.p(j), basis)));
    }
  EXPECT_LT(worst, 1e-6);
}
