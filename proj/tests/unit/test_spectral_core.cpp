#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "holderlab/leray.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/random.hpp"
#include "holderlab/rough_field.hpp"
#include "holderlab/samples.hpp"

using namespace holderlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Random hermitian coefficients with Nyquist slots left empty.
SpectralField random_field(const GridSpec& g, Rank r, std::uint64_t seed, int kmax = 1000) {
  SplitMix64 rng(seed);
  SpectralField f(g, r, true);
  for (std::size_t c = 0; c < f.num_components(); ++c) {
    for_each_mode(g, [&](std::size_t, int kx, int ky, int kz, bool nyq) {
      if (nyq || std::abs(kx) > kmax || std::abs(ky) > kmax || std::abs(kz) > kmax) return;
      // fill each conjugate pair once
      if (std::tuple(kx, ky, kz) < std::tuple(-kx, -ky, -kz)) return;
      Complex z{rng.symmetric(), rng.symmetric()};
      if (kx == 0 && ky == 0 && kz == 0) z = {z.real(), 0.0};
      f.at(c, kx, ky, kz) = z;
      f.at(c, -kx, -ky, -kz) = std::conj(z);
    });
  }
  return f;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

}  // namespace

TEST(GridSpec, RejectsOddOrSmall) {
  EXPECT_THROW(GridSpec(7), PreconditionError);
  EXPECT_THROW(GridSpec(6), PreconditionError);
  EXPECT_THROW(GridSpec(9), PreconditionError);
  EXPECT_NO_THROW(GridSpec(8));
  EXPECT_DOUBLE_EQ(GridSpec(16).spacing(), 2 * kPi / 16);
}

TEST(SplitMix64, MatchesReferenceSequence) {
  // Reference values of SplitMix64 seeded with 1234567.
  SplitMix64 r(1234567);
  EXPECT_EQ(r.next(), 6457827717110365317ULL);
  EXPECT_EQ(r.next(), 3203168211198807973ULL);
  EXPECT_EQ(r.next(), 9817491932198370423ULL);
}

TEST(ToSamples, SingleModeIsCosine) {
  GridSpec g(16);
  SpectralField f(g, Rank::scalar);
  f.at(0, 1, 0, 0) = 0.5;
  f.at(0, -1, 0, 0) = 0.5;
  const auto s = to_samples(f);
  const double h = g.spacing();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; j += 5)
      for (int l = 0; l < 16; l += 3) EXPECT_NEAR(s.at(0, i, j, l), std::cos(i * h), 1e-15);
}

TEST(ToSamples, ZeroField) {
  GridSpec g(8);
  const auto s = to_samples(SpectralField(g, Rank::vector));
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(ToSamples, RejectsNonHermitian) {
  GridSpec g(8);
  SpectralField f(g, Rank::scalar, false);
  EXPECT_THROW(to_samples(f), PreconditionError);
  SpectralField h(g, Rank::scalar, true);
  h.at(0, 1, 2, 0) = Complex{1.0, 0.0};  // no conjugate partner
  EXPECT_THROW(to_samples(h), PreconditionError);
}

TEST(ToSamples, RoundTrip) {
  GridSpec g(16);
  const auto f = random_field(g, Rank::vector, 7);
  const auto back = from_samples(to_samples(f));
  EXPECT_LE(max_diff(f, back), 1e-12 * f.max_abs());
}

TEST(FromSamples, ConstantArray) {
  GridSpec g(8);
  std::vector<double> v(g.size(), 2.5);
  const auto f = from_samples(v, g);
  EXPECT_NEAR(f.at(0, 0, 0, 0).real(), 2.5, 1e-15);
  double rest = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) rest = std::max(rest, std::abs(f.coeffs()[i]));
  EXPECT_LE(rest, 1e-15);
}

TEST(FromSamples, CosineSamples) {
  GridSpec g(16);
  std::vector<double> v(g.size());
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < 16; ++l) v[g.index(i, j, l)] = std::cos(i * g.spacing());
  const auto f = from_samples(v, g);
  EXPECT_NEAR(std::abs(f.at(0, 1, 0, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.at(0, -1, 0, 0) - 0.5), 0.0, 1e-15);
}

TEST(FromSamples, ParsevalOnWhiteNoise) {
  GridSpec g(16);
  SplitMix64 rng(99);
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.symmetric();
  const auto f = from_samples(v, g);
  double lhs = 0.0, rhs = 0.0;
  for (double x : v) lhs += x * x;
  lhs /= static_cast<double>(g.size());
  for (const auto& z : f.coeffs()) rhs += std::norm(z);
  EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
}

TEST(FromSamples, ShapeMismatch) {
  GridSpec g(8);
  std::vector<double> v(g.size() - 1);
  EXPECT_THROW(from_samples(v, g), PreconditionError);
  std::vector<double> w(g.size());
  EXPECT_THROW(from_samples(w, g, Rank::vector), PreconditionError);
}

TEST(RoughField, SingleOctaveSingleMode) {
  GridSpec g(16);
  const auto f = make_rough_field({.theta = 0.5, .octaves = 0, .modes_per_octave = 1, .seed = 3}, g);
  int nonzero = 0;
  for (const auto& z : f.coeffs()) nonzero += std::abs(z) > 0;
  EXPECT_EQ(nonzero, 2);
  EXPECT_LE(f.hermitian_defect(), 0.0);
  EXPECT_NEAR(to_samples(f).values.size(), g.size(), 0);
}

TEST(RoughField, Deterministic) {
  GridSpec g(32);
  RandomFieldSpec s{.theta = 0.4, .octaves = 3, .modes_per_octave = 8, .seed = 42};
  const auto a = make_rough_field(s, g, Rank::vector);
  const auto b = make_rough_field(s, g, Rank::vector);
  EXPECT_TRUE(std::equal(a.coeffs().begin(), a.coeffs().end(), b.coeffs().begin()));
  s.seed = 43;
  const auto c = make_rough_field(s, g, Rank::vector);
  EXPECT_FALSE(std::equal(a.coeffs().begin(), a.coeffs().end(), c.coeffs().begin()));
}

TEST(RoughField, ShellsAndAmplitudes) {
  GridSpec g(32);
  const auto f = make_rough_field({.theta = 0.3, .octaves = 3, .modes_per_octave = 4, .seed = 5}, g);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool) {
    if (std::abs(f.coeffs()[idx]) == 0.0) return;
    const double k = std::sqrt(double(kx * kx + ky * ky + kz * kz));
    EXPECT_GE(k, 1.0);
    EXPECT_LT(k, 16.0);
  });
}

TEST(RoughField, BandLimitViolation) {
  GridSpec g(32);
  EXPECT_EQ(max_octaves(g), 3);
  EXPECT_EQ(max_octaves(GridSpec(128)), 5);
  EXPECT_EQ(max_octaves(GridSpec(256)), 6);
  EXPECT_THROW(make_rough_field({.octaves = 4}, g), PreconditionError);
  EXPECT_THROW(make_rough_field({.theta = 1.2, .octaves = 1}, g), PreconditionError);
}

TEST(RoughField, VectorIsSolenoidal) {
  GridSpec g(32);
  const auto u = make_rough_field({.theta = 0.4, .octaves = 3, .modes_per_octave = 8, .seed = 9}, g, Rank::vector);
  EXPECT_LE(divergence(u).max_abs(), 1e-14);
}

TEST(Leray, AnnihilatesGradients) {
  GridSpec g(16);
  const auto phi = random_field(g, Rank::scalar, 11);
  const auto p = leray_project(grad(phi));
  double rest = 0.0;
  for (std::size_t c = 0; c < 3; ++c) rest = std::max(rest, std::abs(p.component(c)[0]));
  auto q = p;
  for (std::size_t c = 0; c < 3; ++c) q.component(c)[0] = 0.0;
  EXPECT_LE(q.max_abs(), 1e-14 * grad(phi).max_abs());
}

TEST(Leray, IdempotentOnSolenoidal) {
  GridSpec g(16);
  const auto u = leray_project(random_field(g, Rank::vector, 12));
  EXPECT_LE(max_diff(u, leray_project(u)), 1e-14);
}

TEST(Leray, DivergenceOfProjectionVanishes) {
  GridSpec g(16);
  const auto u = random_field(g, Rank::vector, 13);
  const auto p = leray_project(u);
  EXPECT_LE(to_samples(divergence(p)).values.size(), g.size());
  double m = 0.0;
  for (double v : to_samples(divergence(p)).values) m = std::max(m, std::abs(v));
  EXPECT_LE(m, 1e-12 * l2_norm(u));
  EXPECT_THROW(leray_project(SpectralField(g, Rank::scalar)), PreconditionError);
}

TEST(Shift, FullPeriodIsIdentity) {
  GridSpec g(16);
  const auto f = random_field(g, Rank::scalar, 21);
  EXPECT_LE(max_diff(f, shift_samples(f, {2 * kPi, 0.0, 0.0})), 1e-13);
}

TEST(Shift, CosineByPiFlipsSign) {
  GridSpec g(16);
  SpectralField f(g, Rank::scalar);
  f.at(0, 1, 0, 0) = 0.5;
  f.at(0, -1, 0, 0) = 0.5;
  const auto s = to_samples(shift_samples(f, {kPi, 0.0, 0.0}));
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(s.at(0, i, 3, 4), -std::cos(i * g.spacing()), 1e-14);
}

TEST(Shift, RoundTrip) {
  GridSpec g(16);
  const auto f = random_field(g, Rank::vector, 22);
  const Vec3 y{0.3, -1.7, 2.2};
  const auto back = shift_samples(shift_samples(f, y), {-y[0], -y[1], -y[2]});
  EXPECT_LE(max_diff(f, back), 1e-12);
}

TEST(Shift, MatchesGridShift) {
  GridSpec g(16);
  const auto f = random_field(g, Rank::scalar, 23);
  const auto s0 = to_samples(f);
  const auto s1 = to_samples(shift_samples(f, {2 * g.spacing(), 0.0, -g.spacing()}));
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(s1.at(0, i, 5, 7), s0.at(0, (i + 2) % 16, 5, 6), 1e-12);
}

TEST(Multiply, SingleModeProductIsExact) {
  GridSpec g(16);
  SpectralField a(g, Rank::scalar), b(g, Rank::scalar);
  a.at(0, 3, 0, 0) = 0.5;
  a.at(0, -3, 0, 0) = 0.5;
  b.at(0, 0, 2, 1) = Complex{0.0, -0.5};
  b.at(0, 0, -2, -1) = Complex{0.0, 0.5};
  const auto p = multiply(a, b);
  // cos(3x) sin(2y+z) = [sin(3x+2y+z) - sin(3x-2y-z)]/2
  EXPECT_NEAR(std::abs(p.at(0, 3, 2, 1) - Complex{0.0, -0.25}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.at(0, -3, 2, 1) - Complex{0.0, -0.25}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.at(0, 3, -2, -1) - Complex{0.0, 0.25}), 0.0, 1e-15);
}

TEST(Multiply, MatchesSamplesWhenBandLimited) {
  GridSpec g(16);
  const auto u = random_field(g, Rank::vector, 31, 2);
  const auto uu = multiply(u, u);
  ASSERT_EQ(uu.rank(), Rank::tensor2);
  const auto su = to_samples(u);
  const auto suu = to_samples(uu);
  for (std::size_t q = 0; q < g.size(); q += 97)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        EXPECT_NEAR(suu.component(tidx(i, j))[q], su.component(i)[q] * su.component(j)[q], 1e-12);
}

TEST(Multiply, ComplexPathMatchesRealPath) {
  GridSpec g(16);
  const auto u = random_field(g, Rank::vector, 32, 5);
  auto v = u;
  v.set_hermitian(false);
  EXPECT_LE(max_diff(multiply(u, u), multiply(v, v)), 1e-13);
}

TEST(Multiply, TripleProductTruncationIsAliasFree) {
  GridSpec g(8);
  SpectralField u(g, Rank::vector, false);
  u.at(0, 3, 0, 0) = 1.0;
  u.at(1, 3, 0, 0) = 2.0;
  u.at(2, 0, 3, 0) = 1.0;
  const auto t = triple_product(u, u, u);
  // k = (9,0,0) would alias onto (1,0,0) without padding.
  EXPECT_LE(t.max_abs(), 1e-14);
}

TEST(Multiply, RankOverflow) {
  GridSpec g(8);
  SpectralField t(g, Rank::tensor2);
  EXPECT_THROW(multiply(t, t), PreconditionError);
  EXPECT_THROW(multiply(t, SpectralField(GridSpec(10), Rank::vector)), PreconditionError);
}

TEST(EvaluateAt, MatchesGridSamples) {
  GridSpec g(8);
  const auto f = random_field(g, Rank::scalar, 41);
  const auto s = to_samples(f);
  const double h = g.spacing();
  EXPECT_NEAR(evaluate_at(f, 0, {2 * h, 5 * h, 7 * h}), s.at(0, 2, 5, 7), 1e-12);
}

TEST(Csv, WritesHeaderAndRows) {
  GridSpec g(8);
  std::ostringstream os;
  write_csv(os, to_samples(SpectralField(g, Rank::vector)), 4);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind("i,j,l,v0,v1,v2\n", 0), 0u);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 1 + 8);
}
