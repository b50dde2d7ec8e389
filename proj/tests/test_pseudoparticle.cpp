#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "support/quadrature_oracle.hpp"
#include "wigner/oracle.hpp"
#include "wigner/pseudoparticle.hpp"
#include "wigner/spectral.hpp"

using namespace wigner;
using namespace wigner::pseudoparticle;

namespace {

const PhaseSpaceGrid kGrid = make_grid(-16, 16, 256, -4.8, 4.8, 256);
const Potential kWell = Potential::gaussian_well(1, 3);

WignerField gaussian(const PhaseSpaceGrid& g, double x0, double p0, double beta_sq = 1.0) {
  WignerField f(g);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.np; ++j) {
      const double x = g.x(i) - x0, p = g.p(j) - p0;
      f(i, j) = 2.0 * std::exp(-x * x / beta_sq - p * p * beta_sq);
    }
  return f;
}

const oracle::EigenSolution& solution() {
  static const auto sol = oracle::solve(oracle::make_basis(1.0, 10), 3.0);
  return sol;
}

const WignerField& oracle_at(double t) {
  static const WignerField f0 = oracle::sample_field(oracle::two_state_superposition(solution()), 0.0, kGrid);
  static const WignerField f3 = oracle::sample_field(oracle::two_state_superposition(solution()), 3.0, kGrid);
  return t == 0.0 ? f0 : f3;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST(StepLo, ZeroTimeIsIdentity) {
  const auto f = gaussian(kGrid, 1.0, 0.3);
  EXPECT_EQ(diff_metrics(step_lo(f, kWell, 0.0, 0.0), f).linf, 0.0);
}

TEST(StepLo, FreeParticleMatchesShear) {
  const auto f0 = gaussian(kGrid, 0.0, 0.5);
  const auto r = evolve_lo(f0, Potential::constant(0.0), 0.0, 2.0, 20);
  WignerField exact(kGrid);
  for (std::size_t i = 0; i < kGrid.nx; ++i)
    for (std::size_t j = 0; j < kGrid.np; ++j) {
      const double x = kGrid.x(i) - kGrid.p(j) * 2.0, p = kGrid.p(j) - 0.5;
      exact(i, j) = 2.0 * std::exp(-x * x - p * p);
    }
  EXPECT_LT(diff_metrics(r.field, exact).linf, 5e-3);
}

TEST(StepLo, HarmonicOnePeriod) {
  const auto f0 = gaussian(kGrid, 1.0, 0.0);
  const auto r = evolve_lo(f0, Potential::harmonic(1.0), 0.0, 2.0 * std::numbers::pi, 400);
  EXPECT_LT(diff_metrics(r.field, f0).linf, 5e-3);
}

TEST(StepLo, LinearPotentialConvergesToAnalyticSolution) {
  // f(x, p, t) = f0(x - p t - g t^2 / 2, p + g t) for V = g x.
  const double g = 0.3, T = 1.0;
  const auto f0 = gaussian(kGrid, 0.0, 0.0);
  WignerField exact(kGrid);
  for (std::size_t i = 0; i < kGrid.nx; ++i)
    for (std::size_t j = 0; j < kGrid.np; ++j) {
      const double x = kGrid.x(i) - kGrid.p(j) * T - 0.5 * g * T * T, p = kGrid.p(j) + g * T;
      exact(i, j) = 2.0 * std::exp(-x * x - p * p);
    }
  const auto pot = Potential::linear(g);
  const double coarse = diff_metrics(evolve_lo(f0, pot, 0.0, T, 10).field, exact).linf;
  const double fine = diff_metrics(evolve_lo(f0, pot, 0.0, T, 20).field, exact).linf;
  EXPECT_LT(fine, 0.6 * coarse);
  EXPECT_LT(fine, 2e-2);
}

TEST(StepLo, ArrivalForcePointDiffersFromDeparture) {
  const auto& f = oracle_at(0.0);
  LoOptions arrival{.force_point = ForcePoint::arrival};
  EXPECT_GT(diff_metrics(step_lo(f, kWell, 0.0, 0.1), step_lo(f, kWell, 0.0, 0.1, arrival)).linf, 0.0);
  EXPECT_THROW(step_lo(f, kWell, 0.0, 0.1, LoOptions{.mass = 0.0}), std::invalid_argument);
}

TEST(DP3, CubicProfileFiniteDifference) {
  WignerField f(kGrid);
  for (std::size_t i = 0; i < kGrid.nx; ++i) {
    const double w = std::exp(-kGrid.x(i) * kGrid.x(i) / 8.0);
    for (std::size_t j = 0; j < kGrid.np; ++j) f(i, j) = std::pow(kGrid.p(j), 3) * w;
  }
  const auto d = d_p3(f, Derivative::finite_difference);
  for (std::size_t i = 0; i < kGrid.nx; i += 9) {
    const double w = std::exp(-kGrid.x(i) * kGrid.x(i) / 8.0);
    if (w < 1e-6) continue;
    for (std::size_t j = 2; j + 2 < kGrid.np; ++j) EXPECT_NEAR(d(i, j), 6.0 * w, 1e-3 * 6.0 * w);
  }
}

TEST(DP3, GaussianSpectral) {
  const auto f = gaussian(kGrid, 0.0, 0.0, 2.0);
  const auto d = d_p3(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < kGrid.nx; ++i)
    for (std::size_t j = 0; j < kGrid.np; ++j) {
      const double x = kGrid.x(i), q = kGrid.p(j);
      // d^3/dq^3 e^{-2 q^2} = (48 q - 64 q^3) e^{-2 q^2}
      const double exact = 2.0 * std::exp(-x * x / 2.0) * (48.0 * q - 64.0 * q * q * q) * std::exp(-2.0 * q * q);
      worst = std::max(worst, std::abs(d(i, j) - exact));
    }
  EXPECT_LT(worst, 1e-6);
}

TEST(DP3, ConstantFieldGivesZero) {
  WignerField f(kGrid);
  for (auto& v : f.values()) v = 0.75;
  const auto spectral = d_p3(f);
  for (double v : spectral.values()) EXPECT_NEAR(v, 0.0, 1e-12);
  const auto fd = d_p3(f, Derivative::finite_difference);
  for (std::size_t i = 0; i < kGrid.nx; ++i)
    for (std::size_t j = 2; j + 2 < kGrid.np; ++j) EXPECT_NEAR(fd(i, j), 0.0, 1e-9);
}

TEST(NloCorrection, VanishesForHarmonic) {
  const auto f = gaussian(kGrid, 1.0, 0.0);
  EXPECT_EQ(diff_metrics(nlo_correction(f, Potential::harmonic(1), 0.0, 0.1), f).linf, 0.0);
  NloOptions add{.form = NloForm::additive};
  EXPECT_EQ(diff_metrics(nlo_correction(f, Potential::harmonic(1), 0.0, 0.1, 1, add), f).linf, 0.0);
}

TEST(NloCorrection, RejectsHigherOrders) {
  EXPECT_THROW(nlo_correction(oracle_at(0.0), kWell, 0.0, 0.1, 2), std::invalid_argument);
  EXPECT_THROW(nlo_correction(oracle_at(0.0), kWell, 0.0, 0.1, 0), std::invalid_argument);
}

TEST(NloCorrection, AdditiveIsOddInPotential) {
  const auto& f = oracle_at(0.0);
  NloOptions add{.form = NloForm::additive};
  const auto up = nlo_correction(f, Potential::gaussian_well(1, 3), 0.0, 0.1, 1, add);
  const auto down = nlo_correction(f, Potential::gaussian_well(-1, 3), 0.0, 0.1, 1, add);
  for (std::size_t k = 0; k < f.values().size(); ++k)
    EXPECT_NEAR(up.values()[k] - f.values()[k], -(down.values()[k] - f.values()[k]), 1e-14);
}

TEST(NloCorrection, ExponentiatedAgreesWithAdditiveAtSmallDt) {
  const auto& f = oracle_at(0.0);
  const double dt = 1e-3;
  const auto e = nlo_correction(f, kWell, 0.0, dt);
  const auto a = nlo_correction(f, kWell, 0.0, dt, 1, NloOptions{.form = NloForm::additive});
  std::vector<double> de(f.values().size()), da(f.values().size());
  for (std::size_t k = 0; k < de.size(); ++k) {
    de[k] = e.values()[k] - f.values()[k];
    da[k] = a.values()[k] - f.values()[k];
  }
  EXPECT_GT(correlation(de, da), 0.999);
}

TEST(NloCorrection, TracksSpectralResidualOnOneStep) {
  const auto& f = oracle_at(0.0);
  const double dt = 0.01;
  const auto lo = step_lo(f, kWell, 0.0, dt);
  const auto nlo = nlo_correction(lo, kWell, 0.0, dt);
  const auto full = spectral::step_full(f, kWell, 0.0, spectral::SpectralStepConfig{.dt = dt});
  std::vector<double> corr(f.values().size()), resid(f.values().size());
  for (std::size_t k = 0; k < corr.size(); ++k) {
    corr[k] = nlo.values()[k] - lo.values()[k];
    resid[k] = full.values()[k] - lo.values()[k];
  }
  EXPECT_GT(correlation(corr, resid), 0.9);
}

TEST(NloCorrection, FiniteDifferenceDerivativeAgreesWithSpectral) {
  const auto& f = oracle_at(0.0);
  NloOptions spec{.form = NloForm::additive, .derivative = Derivative::spectral};
  NloOptions fd{.form = NloForm::additive, .derivative = Derivative::finite_difference};
  const auto a = nlo_correction(f, kWell, 0.0, 0.1, 1, spec);
  const auto b = nlo_correction(f, kWell, 0.0, 0.1, 1, fd);
  // The 5-point stencil is second order in dp, so compare against the size of the correction itself.
  EXPECT_LT(diff_metrics(a, b).linf, 0.05 * diff_metrics(a, f).linf) << "correction " << diff_metrics(a, f).linf;
}

TEST(Hierarchy, NloBeatsLoAtThree) {
  const auto lo = evolve_lo(oracle_at(0.0), kWell, 0.0, 3.0, 30);
  const auto nlo = evolve_nlo(oracle_at(0.0), kWell, 0.0, 3.0, 30);
  const auto& ref = oracle_at(3.0);
  EXPECT_LT(diff_metrics(nlo.field, ref).l2, diff_metrics(lo.field, ref).l2);
  const auto sp = spectral::evolve(oracle_at(0.0), kWell, 0.0, 3.0, 30, spectral::SpectralStepConfig{});
  EXPECT_GT(diff_metrics(lo.field, ref).linf, diff_metrics(sp.field, ref).linf);
}

// --- D-function -------------------------------------------------------------

TEST(DFunction, UnitIntegralForAllParameters) {
  for (double alpha : {0.5, 1.0, 2.7, 8.0})
    for (unsigned M = 0; M <= 8; ++M) {
      const DFunctionParams prm{alpha, M};
      const double integral = quad::trapezoid([&](double x) { return d_function(x, prm); }, 40.0 / alpha, 0.01 / alpha);
      EXPECT_NEAR(integral, 1.0, 1e-10) << "alpha " << alpha << " M " << M;
    }
}

TEST(DFunction, OrderZeroIsUnitGaussian) {
  EXPECT_DOUBLE_EQ(normalization(0), 1.0 / std::sqrt(2.0));
  const DFunctionParams prm{1.7, 0};
  for (double x : {0.0, 0.3, -1.2}) {
    const double expect = (1.0 / std::sqrt(2.0)) * 1.7 / std::sqrt(std::numbers::pi) * std::exp(-1.7 * 1.7 * x * x / 2);
    EXPECT_NEAR(d_function(x, prm), expect, 1e-15);
  }
}

TEST(DFunction, EvenInX) {
  for (unsigned M = 0; M <= 6; ++M)
    for (double x : {0.1, 0.9, 2.3}) EXPECT_DOUBLE_EQ(d_function(x, {1.3, M}), d_function(-x, {1.3, M}));
}

TEST(DFunction, PeakGrowsAlongEachParityOfM) {
  // D(0) alternates between the even-M and odd-M sequences; each rises with M.
  for (unsigned M = 2; M <= 8; ++M) EXPECT_GT(d_function(0.0, {1.0, M}), d_function(0.0, {1.0, M - 2})) << "M " << M;
}

TEST(DFunction, ValidatesParameters) {
  EXPECT_THROW(d_function(0.0, {0.0, 1}), std::invalid_argument);
  EXPECT_THROW(d_function(0.0, {-1.0, 1}), std::invalid_argument);
  EXPECT_THROW(d_function(0.0, {1.0, max_dfunction_order + 1}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(dfunction_for_cell(0.25, 3).alpha, 4.0);
  EXPECT_DOUBLE_EQ(dfunction_for_cell(0.25, 3, 2.0).alpha, 8.0);
}

// --- transcription ----------------------------------------------------------

TEST(ToEnsemble, OneParticlePerNodeAndExactWeight) {
  const auto& f = oracle_at(0.0);
  const auto ens = to_ensemble(f);
  EXPECT_EQ(ens.size(), kGrid.nx * kGrid.np);
  EXPECT_NEAR(ens.weight(), norm(f), 1e-12 * norm(f));
  const auto zero = to_ensemble(WignerField(kGrid));
  for (const auto& q : zero.particles) EXPECT_EQ(q.f, 0.0);
}

TEST(Deposit, EmptyEnsembleGivesZeroField) {
  const auto out = deposit(Ensemble{}, kGrid, dfunction_for_cell(kGrid.dx(), 3), dfunction_for_cell(kGrid.dp(), 3));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Deposit, SingleParticleKeepsItsWeight) {
  const std::size_t i = 100, j = 140;
  for (unsigned M : {0u, 1u}) {
    Ensemble ens;
    ens.particles.push_back({kGrid.x(i), kGrid.p(j), 2.5, kGrid.dx(), kGrid.dp()});
    const auto out = deposit(ens, kGrid, dfunction_for_cell(kGrid.dx(), M), dfunction_for_cell(kGrid.dp(), M));
    EXPECT_NEAR(norm(out), 2.5 * kGrid.dx() * kGrid.dp(), 1e-6 * 2.5 * kGrid.dx() * kGrid.dp()) << "M " << M;
  }
}

TEST(Deposit, RoundTripPreservesNorm) {
  const auto& f = oracle_at(0.0);
  const auto out = deposit(to_ensemble(f), kGrid, dfunction_for_cell(kGrid.dx(), 0), dfunction_for_cell(kGrid.dp(), 0));
  EXPECT_NEAR(norm(out), norm(f), 1e-3 * norm(f));
}

TEST(Deposit, DeterministicAndRejectsBadParticles) {
  const auto g = make_grid(-4, 4, 32, -4, 4, 32);
  const auto ens = to_ensemble(gaussian(g, 0.3, 0.1));
  const auto a = deposit(ens, g, dfunction_for_cell(g.dx(), 2), dfunction_for_cell(g.dp(), 2));
  const auto b = deposit(ens, g, dfunction_for_cell(g.dx(), 2), dfunction_for_cell(g.dp(), 2));
  EXPECT_EQ(a.values(), b.values());
  Ensemble bad;
  bad.particles.push_back({0.0, 0.0, 1.0, 0.0, 0.25});
  EXPECT_THROW(deposit(bad, g, dfunction_for_cell(g.dx(), 2), dfunction_for_cell(g.dp(), 2)), std::invalid_argument);
}

TEST(EnsembleIO, RoundTrip) {
  const auto g = make_grid(-4, 4, 8, -4, 4, 8);
  const auto ens = to_ensemble(gaussian(g, 0.3, 0.1));
  std::stringstream ss;
  write_ensemble(ss, ens, 17);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "# ensemble 64");
  ss.seekg(0);
  const auto back = read_ensemble(ss);
  ASSERT_EQ(back.size(), ens.size());
  for (std::size_t k = 0; k < ens.size(); ++k) {
    EXPECT_EQ(back.particles[k].r, ens.particles[k].r);
    EXPECT_EQ(back.particles[k].f, ens.particles[k].f);
    EXPECT_EQ(back.particles[k].dp, ens.particles[k].dp);
  }
  std::stringstream bad("# ensemble 3\n0 0 1 1 1\n");
  EXPECT_THROW(read_ensemble(bad), std::runtime_error);
}
