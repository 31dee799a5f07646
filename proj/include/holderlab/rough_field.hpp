#pragma once

// Lacunary (Weierstrass-type) random fields with prescribed Hölder exponent.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/leray.hpp"
#include "holderlab/random.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

struct RandomFieldSpec {
  double theta = 0.4;
  int octaves = 4;           // J: shells j = 0..J
  int modes_per_octave = 8;  // M
  std::uint64_t seed = 1;
  double amplitude = 1.0;
};

/// Largest J whose top shell |k| < 2^(J+1) fits the grid: 2^(J+1) <= n/2,
/// i.e. 2^J <= n/3 with every component strictly below Nyquist.
inline int max_octaves(const GridSpec& g) {
  int j = -1;
  while ((2 << (j + 1)) <= g.n() / 2) ++j;
  return j;
}

/// f = A sum_j 2^{-j theta} sum_m d_{j,m} cos(k_{j,m}.x + phi_{j,m}), 2^j <= |k_{j,m}| < 2^{j+1}.
///
/// Draw order per mode: three components by below(2*hi-1) - (hi-1) with
/// rejection into the shell, then phi = 2 pi uniform(); for vectors a direction
/// uniform in the unit ball (rejection on three symmetric() draws), projected
/// orthogonally to k and normalized.
inline SpectralField make_rough_field(const RandomFieldSpec& spec, const GridSpec& grid,
                                      Rank rank = Rank::scalar) {
  detail::require(rank == Rank::scalar || rank == Rank::vector,
                  "make_rough_field: rank must be scalar or vector");
  detail::require(spec.theta > 0.0 && spec.theta < 1.0, "make_rough_field: theta must lie in (0,1)");
  detail::require(spec.octaves >= 0 && spec.modes_per_octave >= 1,
                  "make_rough_field: octaves must be >= 0 and modes_per_octave >= 1");
  if (spec.octaves > max_octaves(grid)) {
    throw PreconditionError("make_rough_field: band limit violated, 2^" + std::to_string(spec.octaves) +
                            " exceeds n/3 on a grid with n=" + std::to_string(grid.n()));
  }
  SplitMix64 rng(spec.seed);
  SpectralField f(grid, rank, true);
  const std::size_t nc = components(rank);
  for (int j = 0; j <= spec.octaves; ++j) {
    const long lo = 1L << j, hi = 2L << j;
    const double a = spec.amplitude * std::pow(2.0, -j * spec.theta);
    for (int m = 0; m < spec.modes_per_octave; ++m) {
      std::array<long, 3> k{};
      long q = 0;
      do {
        for (auto& ki : k) ki = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * hi - 1))) - (hi - 1);
        q = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      } while (q < lo * lo || q >= hi * hi);
      const double phi = kTwoPi * rng.uniform();
      Vec3 d{1.0, 0.0, 0.0};
      if (rank == Rank::vector) {
        double dd = 0.0;
        do {
          for (auto& di : d) di = rng.symmetric();
          dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        } while (dd == 0.0 || dd > 1.0);
        const double kd = (k[0] * d[0] + k[1] * d[1] + k[2] * d[2]) / static_cast<double>(q);
        for (int i = 0; i < 3; ++i) d[i] -= kd * static_cast<double>(k[i]);
        const double nd = norm(d);
        if (nd == 0.0) throw NumericalError("make_rough_field: degenerate polarization");
        for (auto& di : d) di /= nd;
      }
      const Complex c = std::polar(0.5 * a, phi);
      const int kx = static_cast<int>(k[0]), ky = static_cast<int>(k[1]), kz = static_cast<int>(k[2]);
      for (std::size_t ci = 0; ci < nc; ++ci) {
        f.at(ci, kx, ky, kz) += d[ci] * c;
        f.at(ci, -kx, -ky, -kz) += d[ci] * std::conj(c);
      }
    }
  }
  return rank == Rank::vector ? leray_project(f) : f;
}

}  // namespace holderlab
