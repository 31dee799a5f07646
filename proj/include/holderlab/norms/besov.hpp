#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// L^p norm over the box, (∫ |f|^p dx)^{1/p}, |f| the Euclidean norm over components.
inline double lp_norm(const GridSamples& s, double p) {
  detail::require(p >= 1.0, "lp_norm: p must be >= 1");
  const std::size_t sz = s.grid.size();
  double acc = 0.0;
  for (std::size_t q = 0; q < sz; ++q) {
    double a = 0.0;
    for (std::size_t c = 0; c < s.num_components(); ++c) a += s.values[c * sz + q] * s.values[c * sz + q];
    acc += std::pow(a, 0.5 * p);
  }
  const double volume = std::pow(2.0 * std::numbers::pi, 3);
  return std::pow(volume * acc / static_cast<double>(sz), 1.0 / p);
}

inline double lp_norm(const SpectralField& f, double p) { return lp_norm(to_samples(f), p); }

/// Shift set of the Besov estimator: magnitudes {2h, 4h, ...} <= π along e1, e2, e3 and (1,1,1)/√3.
inline std::vector<Vec3> besov_shifts(const GridSpec& g) {
  const double s3 = 1.0 / std::sqrt(3.0);
  const Vec3 dirs[4] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {s3, s3, s3}};
  std::vector<Vec3> out;
  for (double r = 2.0 * g.spacing(); r <= std::numbers::pi * (1.0 + 1e-12); r *= 2.0)
    for (const auto& d : dirs) out.push_back({r * d[0], r * d[1], r * d[2]});
  return out;
}

/// sup_y ‖f(.+y) - f‖_{L^p} / |y|^θ over besov_shifts, with exact spectral shifts.
inline double besov_seminorm(const SpectralField& f, double theta, double p) {
  if (!(p == 1.5 || p == 2.0 || p == 3.0)) {
    throw PreconditionError("besov_seminorm: p must be 3/2, 2 or 3, got " + std::to_string(p));
  }
  double best = 0.0;
  for (const auto& y : besov_shifts(f.grid())) {
    const double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    best = std::max(best, lp_norm(shift_samples(f, y) - f, p) / std::pow(r, theta));
  }
  return best;
}

}  // namespace holderlab
