#pragma once

// Monte Carlo estimate of the Sobolev–Slobodeckij seminorm
//   [f]_{W^{θ,p}}^p = ∫_{T^3} ∫_{|x-y|_∞ < π} |f(x) - f(y)|^p / |x-y|^{3+θp} dy dx
// on the sample lattice, stratified by dyadic shells of the displacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/random.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

struct SobolevEstimate {
  double value = 0.0;           // [f]_{W^{θ,p}}
  double standard_error = 0.0;  // of value
  int samples = 0;
};

/// Shell s holds displacements with 2^{s-1} < |d|_∞ <= 2^s (shell 0: |d|_∞ = 1),
/// capped at |d|_∞ <= n/2 - 1.
inline SobolevEstimate sobolev_slobodeckij(const SpectralField& f, double theta, double p = 3.0, int budget = 65536,
                                           std::uint64_t seed = 1) {
  if (!(p == 1.5 || p == 2.0 || p == 3.0)) {
    throw PreconditionError("sobolev_slobodeckij: p must be 3/2, 2 or 3, got " + std::to_string(p));
  }
  detail::require(theta > 0.0 && theta < 1.0, "sobolev_slobodeckij: theta must lie in (0,1)");
  const GridSpec& g = f.grid();
  const int n = g.n();
  const int dmax = n / 2 - 1;
  std::vector<std::pair<int, int>> shells;  // (inner, outer] in |d|_∞
  for (int lo = 0, hi = 1; lo < dmax; lo = hi, hi = std::min(2 * hi, dmax)) shells.emplace_back(lo, hi);
  const int per_shell = budget / static_cast<int>(shells.size());
  if (per_shell < 64) {
    throw PreconditionError("sobolev_slobodeckij: budget " + std::to_string(budget) + " gives fewer than 64 samples in each of " +
                            std::to_string(shells.size()) + " shells");
  }
  const auto s = to_samples(f);
  const std::size_t sz = g.size();
  const double h = g.spacing();
  SplitMix64 rng(seed);
  double total = 0.0, var = 0.0;
  for (const auto& [lo, hi] : shells) {
    const double count = std::pow(2.0 * hi + 1.0, 3) - std::pow(2.0 * lo + 1.0, 3);
    double sum = 0.0, sum2 = 0.0;
    for (int q = 0; q < per_shell; ++q) {
      int d[3];
      do {
        for (auto& di : d) di = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * hi + 1))) - hi;
      } while (std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])}) <= lo);
      int x[3];
      for (auto& xi : x) xi = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const std::size_t ix = g.index(x[0], x[1], x[2]);
      const std::size_t iy = g.index((x[0] + d[0] + n) % n, (x[1] + d[1] + n) % n, (x[2] + d[2] + n) % n);
      double inc2 = 0.0;
      for (std::size_t c = 0; c < s.num_components(); ++c) {
        const double diff = s.values[c * sz + iy] - s.values[c * sz + ix];
        inc2 += diff * diff;
      }
      const double r = h * std::sqrt(double(d[0]) * d[0] + double(d[1]) * d[1] + double(d[2]) * d[2]);
      const double v = std::pow(inc2, 0.5 * p) / std::pow(r, 3.0 + theta * p);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / per_shell;
    const double sample_var = std::max(0.0, (sum2 / per_shell - mean * mean) * per_shell / (per_shell - 1.0));
    // h^6 * (#x = n^3) * (#d in shell) * mean
    const double scale = std::pow(h, 6) * static_cast<double>(sz) * count;
    total += scale * mean;
    var += scale * scale * sample_var / per_shell;
  }
  SobolevEstimate e;
  e.samples = per_shell * static_cast<int>(shells.size());
  e.value = std::pow(total, 1.0 / p);
  e.standard_error = total > 0.0 ? std::sqrt(var) / (p * std::pow(total, (p - 1.0) / p)) : 0.0;
  return e;
}

}  // namespace holderlab
