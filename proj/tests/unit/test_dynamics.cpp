#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "holderlab/dynamics/decomposition.hpp"
#include "holderlab/dynamics/energy.hpp"
#include "holderlab/dynamics/identity.hpp"
#include "holderlab/dynamics/modulus.hpp"
#include "holderlab/dynamics/solver.hpp"
#include "holderlab/dynamics/trajectory_io.hpp"
#include "holderlab/rough_field.hpp"
#include "holderlab/snapshot_io.hpp"

using namespace holderlab;

namespace {

// (0, sin x, cos x): curl u = u, so the nonlinearity is a pure gradient.
SpectralField beltrami(const GridSpec& g) {
  SpectralField u(g, Rank::vector);
  u.at(1, 1, 0, 0) = Complex{0.0, -0.5};
  u.at(1, -1, 0, 0) = Complex{0.0, 0.5};
  u.at(2, 1, 0, 0) = 0.5;
  u.at(2, -1, 0, 0) = 0.5;
  return u;
}

// |k_i| <= 3, so it survives the two-thirds rule from n = 16 up.
SpectralField smooth_flow(const GridSpec& g, std::uint64_t seed) {
  RandomFieldSpec s;
  s.theta = 0.5;
  s.octaves = 1;
  s.seed = seed;
  return make_rough_field(s, g, Rank::vector);
}

SolverConfig config(int n, double dt, double t_end, double nu = 0.0, double alpha = 0.25, int stride = 1) {
  SolverConfig c;
  c.grid = GridSpec(n);
  c.dt = dt;
  c.t_end = t_end;
  c.nu = nu;
  c.alpha = alpha;
  c.snapshot_stride = stride;
  return c;
}

double rel_diff(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

}  // namespace

TEST(Solver, BeltramiDecaysAtFractionalRate) {
  const GridSpec g(16);
  for (double alpha : {0.2, 0.4}) {
    const auto u0 = beltrami(g);
    const auto tr = integrate(u0, config(16, 1e-2, 1.0, 0.3, alpha, 100));
    ASSERT_EQ(tr.size(), 2u);
    // |k| = 1, so the rate is ν regardless of α
    EXPECT_LT(rel_diff(tr.snapshots.back(), std::exp(-0.3) * u0), 1e-12) << alpha;
  }
}

TEST(Solver, FractionalRateDependsOnAlpha) {
  const GridSpec g(16);
  SpectralField u(g, Rank::vector);  // (0, 0, cos 2x)
  u.at(2, 2, 0, 0) = 0.5;
  u.at(2, -2, 0, 0) = 0.5;
  const auto tr = integrate(u, config(16, 1e-2, 0.5, 0.2, 0.3, 50));
  EXPECT_LT(rel_diff(tr.snapshots.back(), std::exp(-0.2 * std::pow(4.0, 0.3) * 0.5) * u), 1e-12);
}

TEST(Solver, ZeroStaysZero) {
  const auto tr = integrate(SpectralField(GridSpec(16), Rank::vector), config(16, 1e-2, 0.1, 0.1));
  EXPECT_EQ(tr.size(), 11u);
  EXPECT_EQ(tr.snapshots.back().max_abs(), 0.0);
}

TEST(Solver, SnapshotScheduleIncludesFinalTime) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 1), config(16, 1e-2, 0.07, 0.0, 0.25, 3));
  ASSERT_EQ(tr.size(), 4u);  // 0, 0.03, 0.06, 0.07
  EXPECT_NEAR(tr.times[1], 0.03, 1e-15);
  EXPECT_NEAR(tr.times.back(), 0.07, 1e-15);
}

TEST(Solver, EulerConservesEnergyAndStaysSolenoidal) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 3), config(16, 2e-3, 0.4, 0.0, 0.25, 50));
  const auto led = energy_ledger(tr);
  EXPECT_LT(std::abs(led.kinetic.back() - led.kinetic.front()) / led.kinetic.front(), 1e-9);
  EXPECT_LT(relative_divergence(tr.snapshots.back()), 1e-12);
  EXPECT_GT(rel_diff(tr.snapshots.back(), tr.snapshots.front()), 1e-2);  // it does move
}

TEST(Solver, RejectsBadInput) {
  const GridSpec g(16);
  // not divergence free: (cos x, 0, 0)
  SpectralField bad(g, Rank::vector);
  bad.at(0, 1, 0, 0) = 0.5;
  bad.at(0, -1, 0, 0) = 0.5;
  EXPECT_THROW(integrate(bad, config(16, 1e-2, 0.1)), PreconditionError);
  // outside the two-thirds band: (0, cos 7x, 0)
  SpectralField wide(g, Rank::vector);
  wide.at(1, 7, 0, 0) = 0.5;
  wide.at(1, -7, 0, 0) = 0.5;
  EXPECT_THROW(integrate(wide, config(16, 1e-2, 0.1)), PreconditionError);
  // grid mismatch, bad dt, non-integer step count
  EXPECT_THROW(integrate(beltrami(g), config(32, 1e-2, 0.1)), PreconditionError);
  EXPECT_THROW(integrate(beltrami(g), config(16, 0.0, 0.1)), PreconditionError);
  EXPECT_THROW(integrate(beltrami(g), config(16, 0.03, 0.1)), PreconditionError);
  EXPECT_THROW(integrate(beltrami(g), config(16, 1e-2, 0.1, 0.1, 0.5)), PreconditionError);
}

TEST(Solver, CflViolationIsANumericalError) {
  // |u| ~ 1, h = 2π/16: dt = 0.5 breaks 0.5 h/|u|
  EXPECT_THROW(integrate(beltrami(GridSpec(16)), config(16, 0.5, 1.0)), NumericalError);
}

TEST(Solver, DealiasHelpers) {
  const GridSpec g(12);
  EXPECT_TRUE(dealias_keeps(g, 3, -3, 0));
  EXPECT_FALSE(dealias_keeps(g, 4, 0, 0));
  SpectralField f(g, Rank::scalar);
  f.at(0, 4, 0, 0) = 1.0;
  f.at(0, 1, 0, 0) = 2.0;
  EXPECT_DOUBLE_EQ(dealias_defect(f), 0.5);
  EXPECT_EQ(dealias_defect(dealias_truncate(f)), 0.0);
}

TEST(Solver, DealiasedStepMatchesAliasFreeTendency) {
  // on band-limited input the n-grid product truncated to the kept set is exact
  const GridSpec g(16);
  const auto u = smooth_flow(g, 5);
  SpectralField n(g, Rank::vector);
  detail::DealiasedNonlinearity rhs(g);
  rhs(u, n);
  EXPECT_LT(l2_norm(n - dealias_truncate(nonlinear_term(u))), 1e-12 * l2_norm(n));
}

TEST(Energy, LedgerTracksDissipation) {
  const GridSpec g(16);
  SpectralField u(g, Rank::vector);  // (0, 0, cos 2x) is a steady Euler solution
  u.at(2, 2, 0, 0) = 0.5;
  u.at(2, -2, 0, 0) = 0.5;
  const double nu = 0.2, alpha = 0.3;
  const auto tr = integrate(u, config(16, 1e-2, 1.0, nu, alpha, 10));
  const auto led = energy_ledger(tr);
  const double rate = nu * std::pow(4.0, alpha);
  const double e0 = 0.25 * std::pow(kTwoPi, 3);  // ½∫cos²
  EXPECT_NEAR(led.kinetic.front(), e0, 1e-12 * e0);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    EXPECT_NEAR(led.kinetic[k], e0 * std::exp(-2.0 * rate * tr.times[k]), 1e-11 * e0);
    EXPECT_NEAR(dissipation_rate(tr.snapshots[k], alpha), 2.0 * std::pow(4.0, alpha) * led.kinetic[k], 1e-11 * e0);
    EXPECT_NEAR(led.total[k], e0, 1e-3 * e0);
  }
  // the trapezoid rule on an exponential: relative error ~ (rate dt)^2/12
  EXPECT_LT(led.max_balance_rate(), 1e-2 * rate * e0);
}

TEST(Energy, DissipationRateOfSingleMode) {
  const GridSpec g(16);
  SpectralField u(g, Rank::vector);
  u.at(0, 0, 3, 0) = 0.5;
  u.at(0, 0, -3, 0) = 0.5;
  EXPECT_NEAR(dissipation_rate(u, 0.25), std::pow(9.0, 0.25) * 0.5 * std::pow(kTwoPi, 3), 1e-10);
}

TEST(Energy, CsvHasOneRowPerSnapshot) {
  const auto tr = integrate(beltrami(GridSpec(16)), config(16, 1e-2, 0.05, 0.1));
  std::ostringstream os;
  energy_ledger(tr).write_csv(os);
  const auto text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);  // header + 6
}

TEST(Identity, ResidualIsSmallAndSecondOrder) {
  const GridSpec g(16);
  MollifierSpec m;
  m.delta = 4.0 * g.spacing();
  double prev = 0.0;
  for (double dt : {4e-3, 2e-3}) {
    const auto tr = integrate(smooth_flow(g, 1), config(16, dt, 20 * dt, 0.05, 0.3));
    const auto r = mollified_energy_identity(tr, m);
    EXPECT_LT(r.max_relative(), 1e-4) << dt;
    if (prev > 0.0) {
      EXPECT_GT(std::log2(prev / r.max_relative()), 1.8);
    }
    prev = r.max_relative();
  }
}

TEST(Identity, NeedsThreeSnapshots) {
  const auto tr = integrate(beltrami(GridSpec(16)), config(16, 1e-2, 0.01));
  MollifierSpec m;
  m.delta = 0.8;
  EXPECT_THROW(mollified_energy_identity(tr, m), PreconditionError);
}

TEST(Identity, FluxVanishesForShearAndDecaysForRoughFields) {
  const GridSpec g(32);
  SpectralField shear(g, Rank::vector);  // (sin y, 0, 0): R_δ has no component that meets ∇u_δ
  shear.at(0, 0, 1, 0) = Complex{0.0, -0.5};
  shear.at(0, 0, -1, 0) = Complex{0.0, 0.5};
  MollifierSpec m;
  m.delta = 0.5;
  EXPECT_LT(std::abs(energy_flux(shear, m)), 1e-12);

  RandomFieldSpec s;
  s.theta = 0.4;
  s.octaves = 3;
  const auto u = make_rough_field(s, g, Rank::vector);
  const auto rep = flux_scan(u, {0.4, 0.8, 1.6}, 0.2);
  EXPECT_GT(rep.slope, 0.05);
}

TEST(Modulus, SteadyFlowHasZeroModulus) {
  const GridSpec g(16);
  SpectralField u(g, Rank::vector);  // (0, 0, cos 2x)
  u.at(2, 2, 0, 0) = 0.5;
  u.at(2, -2, 0, 0) = 0.5;
  const auto tr = integrate(u, config(16, 1e-2, 0.16));
  const auto rep = time_modulus_scan(tr, 0.5);
  for (double v : rep.max_measured) EXPECT_LT(v, 1e-13);
  EXPECT_FALSE(rep.fit_valid);
  EXPECT_TRUE(rep.majorant_holds());
}

TEST(Modulus, MajorantBoundsMeasuredIncrements) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 2), config(16, 1e-2, 0.64, 0.0, 0.25, 2));
  const auto rep = time_modulus_scan(tr, 1.0, 8);
  EXPECT_TRUE(rep.majorant_holds()) << rep.min_margin();
  ASSERT_TRUE(rep.fit_valid);
  // Lipschitz in time at small gaps
  const double s = std::log(rep.max_measured[1] / rep.max_measured[0]) / std::log(rep.gaps[1] / rep.gaps[0]);
  EXPECT_GT(s, 0.9);
}

TEST(Modulus, NeedsEightSnapshots) {
  const auto tr = integrate(beltrami(GridSpec(16)), config(16, 1e-2, 0.05));
  EXPECT_THROW(time_modulus_scan(tr, 0.5), PreconditionError);
}

TEST(EnergyModulus, Exponents) {
  EXPECT_NEAR(energy_modulus_exponent(0.4, 0.0, 0.25), 0.8 / 0.6, 1e-15);
  EXPECT_NEAR(energy_modulus_exponent(1.0 / 3.0, 0.0, 0.25), 1.0, 1e-15);
  EXPECT_NEAR(energy_modulus_exponent(0.4, 0.1, 0.2), 2.0, 1e-12);
  EXPECT_THROW(energy_modulus_exponent(0.2, 0.1, 0.25), PreconditionError);  // θ <= α
  EXPECT_THROW(energy_modulus_exponent(0.9, 0.1, 0.45), PreconditionError);  // denominator <= 0
  EXPECT_THROW(energy_modulus_exponent(1.0, 0.0, 0.25), PreconditionError);
}

TEST(EnergyModulus, ScanBoundsIncrementsAndFlagsThreshold) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 4), config(16, 1e-2, 0.4, 0.0, 0.25, 2));
  const auto rep = energy_modulus_scan(tr, 0.4, {0.02, 0.04, 0.08});
  EXPECT_FALSE(rep.total_energy);
  EXPECT_FALSE(rep.conservation_threshold);
  EXPECT_GT(rep.besov_seminorm, 0.0);
  const double b = rep.besov_seminorm;
  for (std::size_t k = 0; k < rep.gaps.size(); ++k) {
    EXPECT_LE(rep.max_increment[k], rep.constant * (b * b + b * b * b) * std::pow(rep.gaps[k], rep.exponent) * (1 + 1e-12));
  }
  EXPECT_TRUE(energy_modulus_scan(tr, 1.0 / 3.0, {0.02}).conservation_threshold);
  EXPECT_THROW(energy_modulus_scan(tr, 0.4, {0.03}), PreconditionError);  // not a multiple of 0.02
  EXPECT_THROW(energy_modulus_scan(tr, 0.4, {}), PreconditionError);
}

TEST(EnergyModulus, ViscousRunUsesTotalEnergy) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 4), config(16, 1e-2, 0.2, 0.05, 0.2, 2));
  const auto rep = energy_modulus_scan(tr, 0.4, {0.02, 0.04});
  EXPECT_TRUE(rep.total_energy);
  EXPECT_NEAR(rep.exponent, 2.0, 1e-12);  // 2(θ-α)/(1-3θ+2(θ-α))
}

TEST(Decomposition, CoincidentTimesGiveZero) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 2), config(16, 1e-2, 0.04));
  MollifierSpec m;
  m.delta = 0.8;
  const auto r = pressure_decomposition_check(tr, m, 2, 2);
  EXPECT_EQ(r.residual, 0.0);
  for (double v : r.term_norms) EXPECT_EQ(v, 0.0);
}

TEST(Decomposition, TermsReassembleTheIncrementToSecondOrder) {
  // n = 32 keeps every product of the |k_i| <= 3 flow, so the Galerkin flow is the PDE here
  const GridSpec g(32);
  MollifierSpec m;
  m.delta = 4.0 * g.spacing();
  for (double nu : {0.0, 0.05}) {
    const auto tr = integrate(smooth_flow(g, 2), config(32, 2e-3, 0.016, nu, 0.3));
    const auto fine = pressure_decomposition_check(tr, m, 0, 8, 1);
    const auto coarse = pressure_decomposition_check(tr, m, 0, 8, 2);
    EXPECT_LT(fine.relative(), 1e-3) << nu;
    EXPECT_GT(fine.increment_norm, 0.0);
    EXPECT_NEAR(coarse.relative() / fine.relative(), 4.0, 1.0) << nu;
    if (nu == 0.0) {
      EXPECT_EQ(fine.term_norms[3], 0.0);
      EXPECT_EQ(fine.term_norms[4], 0.0);
    } else {
      EXPECT_GT(fine.term_norms[3], 0.0);
    }
  }
}

TEST(Decomposition, RefusesTooFewNodes) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 2), config(16, 1e-2, 0.04));
  MollifierSpec m;
  m.delta = 0.8;
  EXPECT_THROW(pressure_decomposition_check(tr, m, 0, 1), PreconditionError);
  EXPECT_THROW(pressure_decomposition_check(tr, m, 0, 3, 2), PreconditionError);
  EXPECT_THROW(pressure_decomposition_check(tr, m, 3, 1), PreconditionError);
}

TEST(SnapshotIo, RoundTripIsBitExact) {
  const auto u = smooth_flow(GridSpec(16), 7);
  std::stringstream ss;
  write_snapshot(ss, u);
  const auto text = ss.str();
  EXPECT_EQ(text.substr(0, 4), "HLD1");
  EXPECT_EQ(text.size(), 4 + 3 * 8 + 2 * 8 * u.coeffs().size());
  const auto v = read_snapshot(ss);
  EXPECT_EQ(v.grid().n(), 16);
  EXPECT_EQ(v.rank(), Rank::vector);
  EXPECT_TRUE(v.hermitian());
  for (std::size_t q = 0; q < u.coeffs().size(); ++q) ASSERT_EQ(u.coeffs()[q], v.coeffs()[q]);
}

TEST(SnapshotIo, RejectsCorruptInput) {
  std::stringstream bad("HLD2xxxxxxxx");
  EXPECT_THROW(read_snapshot(bad), PreconditionError);
  std::stringstream ss;
  write_snapshot(ss, beltrami(GridSpec(16)));
  std::stringstream truncated(ss.str().substr(0, 200));
  EXPECT_THROW(read_snapshot(truncated), PreconditionError);
}

TEST(TrajectoryIo, RoundTrip) {
  const auto tr = integrate(smooth_flow(GridSpec(16), 1), config(16, 1e-2, 0.03, 0.1, 0.2));
  const auto dir = std::filesystem::temp_directory_path() / "holderlab_traj_roundtrip";
  std::filesystem::remove_all(dir);
  write_trajectory(tr, dir);
  const auto back = read_trajectory(dir);
  EXPECT_EQ(back.times, tr.times);
  EXPECT_EQ(back.config.nu, 0.1);
  EXPECT_EQ(back.config.alpha, 0.2);
  ASSERT_EQ(back.size(), tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_EQ(l2_norm(back.snapshots[k] - tr.snapshots[k]), 0.0);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_trajectory(dir), PreconditionError);
}
