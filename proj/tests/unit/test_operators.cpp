#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "holderlab/leray.hpp"
#include "holderlab/operators/commutator.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/operators/frac_laplacian.hpp"
#include "holderlab/operators/mollifier.hpp"
#include "holderlab/random.hpp"
#include "holderlab/rough_field.hpp"
#include "holderlab/samples.hpp"

using namespace holderlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Fourier transform of the unit-mass bump by composite Simpson (independent of the library rule).
double bump_hat_simpson(double xi) {
  const int n = 40000;
  const double h = 1.0 / n;
  auto f = [&](double r, bool with_sinc) {
    if (r >= 1.0) return 0.0;
    const double s = (!with_sinc || r * xi == 0.0) ? 1.0 : std::sin(r * xi) / (r * xi);
    return std::exp(-1.0 / (1.0 - r * r)) * r * r * s;
  };
  auto simpson = [&](bool with_sinc) {
    double acc = f(0.0, with_sinc) + f(1.0, with_sinc);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h, with_sinc);
    return acc * h / 3.0;
  };
  return simpson(true) / simpson(false);
}

SpectralField single_mode_vector(const GridSpec& g, int kx, int ky, int kz, Complex a0, Complex a1, Complex a2) {
  SpectralField u(g, Rank::vector);
  const Complex a[3] = {a0, a1, a2};
  for (std::size_t c = 0; c < 3; ++c) {
    u.at(c, kx, ky, kz) += a[c];
    u.at(c, -kx, -ky, -kz) += std::conj(a[c]);
  }
  return u;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

SpectralField exp_mode(const GridSpec& g, Rank r, int kx, int ky, int kz, Complex a = 1.0) {
  SpectralField f(g, r, false);
  for (std::size_t c = 0; c < f.num_components(); ++c) f.at(c, kx, ky, kz) = a * double(c + 1);
  return f;
}

}  // namespace

// --- differential -----------------------------------------------------------

TEST(Differential, CurlOfGradientVanishes) {
  GridSpec g(16);
  const auto phi = make_rough_field({.theta = 0.5, .octaves = 2, .modes_per_octave = 6, .seed = 1}, g);
  EXPECT_LE(curl(grad(phi)).max_abs(), 1e-13);
}

TEST(Differential, DivergenceOfCurlVanishes) {
  GridSpec g(16);
  const auto phi = make_rough_field({.theta = 0.5, .octaves = 2, .modes_per_octave = 6, .seed = 2}, g);
  const auto u = make_vector(phi, shift_samples(phi, {0.3, 0, 0}), shift_samples(phi, {0, 1.1, 0}));
  EXPECT_LE(divergence(curl(u)).max_abs(), 1e-13);
}

TEST(Differential, DivDivOfSingleModeProduct) {
  // u = (cos x2, cos x1, 0): div div(u⊗u) = 2 sin x1 sin x2
  GridSpec g(16);
  const auto u = make_vector(
      [&] { SpectralField f(g, Rank::scalar); f.at(0, 0, 1, 0) = f.at(0, 0, -1, 0) = 0.5; return f; }(),
      [&] { SpectralField f(g, Rank::scalar); f.at(0, 1, 0, 0) = f.at(0, -1, 0, 0) = 0.5; return f; }(),
      SpectralField(g, Rank::scalar));
  const auto s = to_samples(div_div(multiply(u, u)));
  const double h = g.spacing();
  double err = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < 16; l += 5) err = std::max(err, std::abs(s.at(0, i, j, l) - 2 * std::sin(i * h) * std::sin(j * h)));
  EXPECT_LE(err, 1e-10);
}

TEST(Differential, DivergenceOfProjectionVanishes) {
  GridSpec g(16);
  const auto u = make_rough_field({.theta = 0.3, .octaves = 2, .modes_per_octave = 8, .seed = 3}, g, Rank::vector);
  auto v = u;
  v += grad(component_field(u, 0));
  EXPECT_GT(divergence(v).max_abs(), 1e-3);
  EXPECT_LE(divergence(leray_project(v)).max_abs(), 1e-12);
}

TEST(Differential, RankErrors) {
  GridSpec g(8);
  SpectralField s(g, Rank::scalar), v(g, Rank::vector), t(g, Rank::tensor2), t3(g, Rank::tensor3);
  EXPECT_THROW(divergence(s), PreconditionError);
  EXPECT_THROW(curl(s), PreconditionError);
  EXPECT_THROW(div_div(v), PreconditionError);
  EXPECT_THROW(div_div_div(t), PreconditionError);
  EXPECT_THROW(grad(t), PreconditionError);
  EXPECT_NO_THROW(div_div_div(t3));
  EXPECT_EQ(divergence(t3).rank(), Rank::tensor2);
}

TEST(Differential, NyquistAndMeanAreZeroed) {
  GridSpec g(8);
  SpectralField f(g, Rank::scalar);
  f.at(0, 4, 0, 0) = 1.0;
  f.at(0, 0, 0, 0) = 3.0;
  EXPECT_EQ(grad(f).max_abs(), 0.0);
  EXPECT_EQ(laplacian(f).max_abs(), 0.0);
}

// --- mollifier ----------------------------------------------------------------

TEST(Mollify, ConstantFieldIsExact) {
  GridSpec g(16);
  SpectralField f(g, Rank::vector);
  f.at(0, 0, 0, 0) = 2.0;
  f.at(2, 0, 0, 0) = -1.5;
  const auto fd = mollify(f, {.delta = 1.0});
  EXPECT_EQ(max_diff(f, fd), 0.0);
}

TEST(Mollify, PreservesMean) {
  GridSpec g(32);
  auto f = make_rough_field({.theta = 0.4, .octaves = 3, .modes_per_octave = 8, .seed = 4}, g);
  f.at(0, 0, 0, 0) = 0.37;
  for (double d : {0.4, 1.0, 2.5}) EXPECT_NEAR(mean(mollify(f, {.delta = d})).real(), 0.37, 1e-10);
}

TEST(Mollify, KernelHasUnitMass) {
  // Z against an independent composite Simpson rule.
  BumpTransform t(16);
  const int n = 40000;
  double acc = 0.0;
  for (int i = 1; i < n; ++i) {
    const double r = double(i) / n;
    acc += (i % 2 ? 4.0 : 2.0) * bump_profile(r) * r * r;
  }
  const double z = 4.0 * kPi * acc / (3.0 * n);
  EXPECT_NEAR(t.unnormalized_mass() / z, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(t(0.0), 1.0);
  for (double xi : {0.5, 3.0, 11.0, 40.0}) EXPECT_NEAR(t(xi), bump_hat_simpson(xi), 1e-11);
}

TEST(Mollify, MatchesRealSpaceQuadrature) {
  // f_delta(x) = ∫ f(x - y) rho_delta(y) dy for f = cos(k.x), by a spherical product rule.
  GridSpec g(16);
  const int k[3] = {2, -1, 3};
  SpectralField f(g, Rank::scalar);
  f.at(0, k[0], k[1], k[2]) = f.at(0, -k[0], -k[1], -k[2]) = 0.5;
  const double delta = 0.9;
  const Vec3 x{0.3, 1.2, -0.4};
  const auto fd = mollify(f, {.delta = delta});
  const double got = evaluate_at(fd, 0, x);
  const int nr = 400, nm = 200, np = 64;
  double acc = 0.0, mass = 0.0;
  for (int ir = 0; ir < nr; ++ir) {
    const double r = delta * (ir + 0.5) / nr;
    const double wr = bump_profile(r / delta) * r * r * delta / nr;
    for (int im = 0; im < nm; ++im) {
      const double mu = -1.0 + 2.0 * (im + 0.5) / nm;
      const double s = std::sqrt(1 - mu * mu);
      for (int ip = 0; ip < np; ++ip) {
        const double ph = 2 * kPi * (ip + 0.5) / np;
        const double y[3] = {r * s * std::cos(ph), r * s * std::sin(ph), r * mu};
        const double w = wr * (2.0 / nm) * (2 * kPi / np);
        acc += w * std::cos(k[0] * (x[0] - y[0]) + k[1] * (x[1] - y[1]) + k[2] * (x[2] - y[2]));
        mass += w;
      }
    }
  }
  EXPECT_NEAR(got, acc / mass, 5e-6);
}

TEST(Mollify, CommutesWithShift) {
  GridSpec g(32);
  const auto f = make_rough_field({.theta = 0.4, .octaves = 3, .modes_per_octave = 8, .seed = 5}, g);
  const MollifierSpec m{.delta = 0.6};
  const Vec3 y{0.25, -1.0, 2.0};
  EXPECT_LE(max_diff(mollify(shift_samples(f, y), m), shift_samples(mollify(f, m), y)), 1e-10);
}

TEST(Mollify, RefusesUnderResolvedAndLargeDelta) {
  GridSpec g(32);
  SpectralField f(g, Rank::scalar);
  EXPECT_THROW(mollify(f, {.delta = 0.3}), UnderResolvedError);
  EXPECT_NO_THROW(mollify(f, {.delta = 0.3, .allow_subgrid = true}));
  EXPECT_THROW(mollify(f, {.delta = 3.2}), PreconditionError);
  EXPECT_THROW(mollify(f, {.delta = -1.0}), PreconditionError);
  EXPECT_THROW(mollify(f, {.delta = 1.0, .quadrature_points_per_axis = 2}), PreconditionError);
}

// --- Reynolds stress ------------------------------------------------------------

TEST(Reynolds, ConstantVelocityGivesZero) {
  GridSpec g(16);
  SpectralField u(g, Rank::vector);
  u.at(0, 0, 0, 0) = 1.0;
  u.at(1, 0, 0, 0) = -2.0;
  EXPECT_EQ(reynolds_stress(u, {.delta = 1.0}).max_abs(), 0.0);
}

TEST(Reynolds, SingleModeClosedForm) {
  GridSpec g(16);
  const int k[3] = {1, 2, 0};
  const Complex a0{0.3, 0.1}, a1{-0.2, 0.4}, a2{0.5, -0.3};
  const auto u = single_mode_vector(g, k[0], k[1], k[2], a0, a1, a2);
  const double delta = 0.8;
  const auto r = reynolds_stress(u, {.delta = delta});
  const double kn = std::sqrt(5.0);
  const double r1 = bump_hat_simpson(delta * kn), r2 = bump_hat_simpson(2 * delta * kn);
  const Complex a[3] = {a0, a1, a2};
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      // (u⊗u)^ at 0: a_i conj(a_j) + conj(a_i) a_j; at 2k: a_i a_j
      const Complex m0 = a[i] * std::conj(a[j]) + std::conj(a[i]) * a[j];
      const Complex m2 = a[i] * a[j];
      err = std::max(err, std::abs(r.at(tidx(i, j), 0, 0, 0) - (r1 * r1 - 1.0) * m0));
      err = std::max(err, std::abs(r.at(tidx(i, j), 2 * k[0], 2 * k[1], 2 * k[2]) - (r1 * r1 - r2) * m2));
      err = std::max(err, std::abs(r.at(tidx(i, j), k[0], k[1], k[2])));
    }
  EXPECT_LE(err, 1e-8);
}

TEST(Reynolds, IsSymmetric) {
  GridSpec g(16);
  const auto u = make_rough_field({.theta = 0.4, .octaves = 2, .modes_per_octave = 6, .seed = 6}, g, Rank::vector);
  const auto r = reynolds_stress(u, {.delta = 0.9});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t q = 0; q < g.size(); q += 31) EXPECT_EQ(r.component(tidx(i, j))[q], r.component(tidx(j, i))[q]);
}

// --- fractional Laplacian ---------------------------------------------------------

TEST(FracLaplacian, MultiplierEigenrelation) {
  GridSpec g(16);
  for (double alpha : {0.1, 0.25, 0.4}) {
    const auto f = exp_mode(g, Rank::scalar, 3, -2, 5);
    const auto out = frac_laplacian(f, {.alpha = alpha});
    EXPECT_NEAR(std::abs(out.at(0, 3, -2, 5) - std::pow(38.0, alpha)), 0.0, 1e-12);
  }
}

TEST(FracLaplacian, ConstantMapsToZero) {
  GridSpec g(16);
  SpectralField f(g, Rank::scalar);
  f.at(0, 0, 0, 0) = 4.0;
  EXPECT_EQ(frac_laplacian(f, {.alpha = 0.3}).max_abs(), 0.0);
  EXPECT_EQ(frac_laplacian(f, {.alpha = 0.3, .realization = FracRealization::singular_integral}).max_abs(), 0.0);
}

TEST(FracLaplacian, SelfAdjoint) {
  GridSpec g(16);
  const auto f = make_rough_field({.theta = 0.4, .octaves = 2, .modes_per_octave = 8, .seed = 7}, g);
  const auto h = make_rough_field({.theta = 0.6, .octaves = 2, .modes_per_octave = 8, .seed = 8}, g);
  const double a = inner_product(f, frac_laplacian(h, {.alpha = 0.35}));
  const double b = inner_product(h, frac_laplacian(f, {.alpha = 0.35}));
  EXPECT_NEAR(a, b, 1e-10 * std::abs(a));
}

TEST(FracLaplacian, RejectsAlphaOutsideRange) {
  GridSpec g(8);
  SpectralField f(g, Rank::scalar);
  EXPECT_THROW(frac_laplacian(f, {.alpha = 0.5}), PreconditionError);
  EXPECT_THROW(frac_laplacian(f, {.alpha = 0.0}), PreconditionError);
}

TEST(FracLaplacian, SingularIntegralNeedsImageShells) {
  GridSpec g(8);
  SpectralField f(g, Rank::scalar);
  EXPECT_THROW(frac_laplacian(f, {.alpha = 0.25, .realization = FracRealization::singular_integral, .image_shells = 0}),
               PreconditionError);
}

TEST(FracLaplacian, SingularIntegralRejectsWideBand) {
  GridSpec g(16);
  SpectralField f(g, Rank::scalar);
  f.at(0, 6, 0, 0) = f.at(0, -6, 0, 0) = 0.5;
  EXPECT_THROW(SingularIntegralLaplacian(0.25, 1).apply(f), PreconditionError);
}

TEST(FracLaplacian, CalibratedConstantNearAnalytic) {
  for (double alpha : {0.1, 0.25, 0.4}) {
    const SingularIntegralLaplacian s(alpha, 3);
    // exact constant 4^α Γ(3/2+α) / (π^{3/2} |Γ(-α)|), computed here independently
    const double exact = std::pow(4.0, alpha) * std::tgamma(1.5 + alpha) / (std::pow(kPi, 1.5) * std::abs(std::tgamma(-alpha)));
    EXPECT_NEAR(s.constant() / exact, 1.0, 2e-3) << alpha;
  }
}

TEST(FracLaplacian, CrossRealizationOnBandLimitedField) {
  GridSpec g(32);
  const auto f = make_rough_field({.theta = 0.5, .octaves = 2, .modes_per_octave = 8, .seed = 9}, g);
  const auto a = frac_laplacian(f, {.alpha = 0.25});
  const auto b = frac_laplacian(f, {.alpha = 0.25, .realization = FracRealization::singular_integral, .image_shells = 3});
  EXPECT_LE(l2_norm(a - b) / l2_norm(a), 1e-3);
}

TEST(FracLaplacian, PointwiseRuleMatchesModeFactorization) {
  GridSpec g(16);
  const auto f = make_rough_field({.theta = 0.5, .octaves = 1, .modes_per_octave = 3, .seed = 10}, g);
  const SingularIntegralLaplacian s(0.25, 1);
  const auto lf = s.apply(f);
  for (const Vec3& x : {Vec3{0.1, 0.2, 0.3}, Vec3{2.0, -1.0, 4.0}}) {
    EXPECT_NEAR(s.apply_at(f, 0, x), evaluate_at(lf, 0, x), 1e-9 * std::max(1.0, std::abs(evaluate_at(lf, 0, x))));
  }
}

TEST(FracLaplacian, ErrorShrinksWithImageShells) {
  const SingularIntegralLaplacian s3(0.25, 3), s6(0.25, 6);
  const double e3 = std::abs(s3.symbol(2, 1, 0) / std::pow(5.0, 0.25) - 1.0);
  const double e6 = std::abs(s6.symbol(2, 1, 0) / std::pow(5.0, 0.25) - 1.0);
  EXPECT_LT(e6, 0.65 * e3);
}

// --- commutator ---------------------------------------------------------------

TEST(Commutator, TwoModeFormula) {
  GridSpec g(16);
  const double alpha = 0.25;
  const int k[3] = {1, 0, 0}, l[3] = {0, 2, 0};
  const auto f = exp_mode(g, Rank::vector, k[0], k[1], k[2], {0.5, 0.2});
  const auto h = exp_mode(g, Rank::vector, l[0], l[1], l[2], {-0.3, 0.7});
  const auto t = commutator_T(f, h, alpha);
  const double factor = std::pow(5.0, alpha) - 1.0 - std::pow(4.0, alpha);
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const Complex expect = factor * f.at(i, k[0], k[1], k[2]) * h.at(j, l[0], l[1], l[2]);
      err = std::max(err, std::abs(t.at(tidx(i, j), 1, 2, 0) - expect));
    }
  auto rest = t;
  for (std::size_t c = 0; c < 9; ++c) rest.at(c, 1, 2, 0) = 0.0;
  EXPECT_LE(err, 1e-12);
  EXPECT_LE(rest.max_abs(), 1e-12);
}

TEST(Commutator, ConstantSecondArgumentGivesZero) {
  GridSpec g(16);
  const auto f = make_rough_field({.theta = 0.4, .octaves = 2, .modes_per_octave = 8, .seed = 11}, g, Rank::vector);
  SpectralField c(g, Rank::vector);
  c.at(0, 0, 0, 0) = 1.5;
  c.at(2, 0, 0, 0) = -0.5;
  EXPECT_LE(commutator_T(f, c, 0.3).max_abs(), 1e-14);
}

TEST(Commutator, Errors) {
  GridSpec g(8);
  SpectralField a(g, Rank::vector), b(GridSpec(10), Rank::vector);
  EXPECT_THROW(commutator_T(a, b, 0.2), PreconditionError);
  EXPECT_THROW(commutator_T(a, a, 0.6), PreconditionError);
}

TEST(Commutator, Bilinear) {
  GridSpec g(16);
  const auto f1 = make_rough_field({.theta = 0.4, .octaves = 2, .seed = 12}, g, Rank::vector);
  const auto f2 = make_rough_field({.theta = 0.4, .octaves = 2, .seed = 13}, g, Rank::vector);
  const auto h = make_rough_field({.theta = 0.4, .octaves = 2, .seed = 14}, g, Rank::vector);
  const auto lhs = commutator_T(2.0 * f1 + f2, h, 0.2);
  const auto rhs = 2.0 * commutator_T(f1, h, 0.2) + commutator_T(f2, h, 0.2);
  EXPECT_LE(max_diff(lhs, rhs), 1e-12);
}
