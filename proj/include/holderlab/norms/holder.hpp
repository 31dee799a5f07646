#pragma once

// Sampled C^0 / C^θ estimators. The sup in the Hölder seminorm is replaced by a
// max over seeded random pairs at a dyadic ladder of separations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/norms/regression.hpp"
#include "holderlab/random.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// Read-only view of a sampled field on an nx*ny*nz lattice with spacing h.
/// Periodic views wrap around; bounded views keep every pair inside the box.
struct SampledView {
  std::array<int, 3> dims{};
  double spacing = 0.0;
  std::size_t num_components = 1;
  std::span<const double> values;  // component-major, (i*ny + j)*nz + l
  bool periodic = true;

  std::size_t size() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }
  std::size_t index(int i, int j, int l) const { return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + l; }

  static SampledView of(const GridSamples& s) {
    const int n = s.grid.n();
    return {{n, n, n}, s.grid.spacing(), s.num_components(), s.values, true};
  }
};

struct SamplePairLadder {
  std::vector<double> separations;
  int pairs_per_separation = 4096;
  std::uint64_t seed = 1;

  /// {2h, 4h, 8h, ...} up to max_separation (default π/2).
  static SamplePairLadder dyadic(double spacing, double max_separation = std::numbers::pi / 2,
                                 int pairs = 4096, std::uint64_t seed = 1) {
    SamplePairLadder l;
    l.pairs_per_separation = pairs;
    l.seed = seed;
    for (double r = 2.0 * spacing; r <= max_separation * (1.0 + 1e-12); r *= 2.0) l.separations.push_back(r);
    return l;
  }
  static SamplePairLadder dyadic(const GridSpec& g, double max_separation = std::numbers::pi / 2, int pairs = 4096,
                                 std::uint64_t seed = 1) {
    return dyadic(g.spacing(), max_separation, pairs, seed);
  }

  void validate(double spacing) const {
    detail::require(pairs_per_separation >= 1, "SamplePairLadder: pairs_per_separation must be positive");
    for (double r : separations) {
      if (r < 2.0 * spacing * (1.0 - 1e-12)) {
        throw UnderResolvedError("SamplePairLadder: separation " + std::to_string(r) + " is below 2h=" +
                                 std::to_string(2.0 * spacing));
      }
      detail::require(r <= std::numbers::pi * (1.0 + 1e-12),
                      "SamplePairLadder: separation " + std::to_string(r) + " exceeds the half period pi");
    }
  }
};

/// Increments sampled at one ladder rung.
struct RungSample {
  double target_separation = 0.0;
  std::vector<double> separations;  // actual lattice separations
  std::vector<double> increments;   // Euclidean norm over components
};

struct RungStats {
  double separation = 0.0;         // target
  double median_separation = 0.0;  // of the realized lattice pairs
  double median_increment = 0.0;
  double max_increment = 0.0;
  double max_quotient = 0.0;  // max increment / |x-y|^θ
};

struct HolderEstimate {
  double theta = 0.0;
  double seminorm = 0.0;
  SamplePairLadder ladder;
  std::string field_id;
  std::vector<RungStats> rungs;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> separations_used;
  std::vector<double> median_increments;
};

/// Draws the ladder's pairs: a uniform lattice point and a direction uniform on
/// the sphere (rejection in the unit ball), with the displacement r*dir rounded
/// to the lattice. Deterministic in ladder.seed.
inline std::vector<RungSample> sample_pairs(const SampledView& v, const SamplePairLadder& ladder) {
  ladder.validate(v.spacing);
  detail::require(v.values.size() == v.num_components * v.size(), "sample_pairs: view size mismatch");
  SplitMix64 rng(ladder.seed);
  std::vector<RungSample> out;
  const std::size_t sz = v.size();
  for (double r : ladder.separations) {
    RungSample rs;
    rs.target_separation = r;
    rs.separations.reserve(ladder.pairs_per_separation);
    rs.increments.reserve(ladder.pairs_per_separation);
    for (int p = 0; p < ladder.pairs_per_separation; ++p) {
      std::array<int, 3> d{};
      double dd = 0.0;
      do {
        Vec3 dir;
        double q = 0.0;
        do {
          for (auto& c : dir) c = rng.symmetric();
          q = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
        } while (q == 0.0 || q > 1.0);
        const double s = r / (v.spacing * std::sqrt(q));
        for (int a = 0; a < 3; ++a) d[a] = static_cast<int>(std::lround(dir[a] * s));
        dd = double(d[0]) * d[0] + double(d[1]) * d[1] + double(d[2]) * d[2];
      } while (dd == 0.0 || (!v.periodic && (std::abs(d[0]) >= v.dims[0] || std::abs(d[1]) >= v.dims[1] ||
                                             std::abs(d[2]) >= v.dims[2])));
      std::array<int, 3> x{}, y{};
      for (int a = 0; a < 3; ++a) {
        if (v.periodic) {
          x[a] = static_cast<int>(rng.below(static_cast<std::uint64_t>(v.dims[a])));
          y[a] = (x[a] + d[a] % v.dims[a] + v.dims[a]) % v.dims[a];
        } else {
          const int lo = std::max(0, -d[a]);
          const int span = v.dims[a] - std::abs(d[a]);
          x[a] = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
          y[a] = x[a] + d[a];
        }
      }
      const std::size_t ix = v.index(x[0], x[1], x[2]), iy = v.index(y[0], y[1], y[2]);
      double inc2 = 0.0;
      for (std::size_t c = 0; c < v.num_components; ++c) {
        const double diff = v.values[c * sz + iy] - v.values[c * sz + ix];
        inc2 += diff * diff;
      }
      rs.separations.push_back(std::sqrt(dd) * v.spacing);
      rs.increments.push_back(std::sqrt(inc2));
    }
    out.push_back(std::move(rs));
  }
  return out;
}

inline std::vector<RungStats> rung_statistics(const std::vector<RungSample>& samples, double theta) {
  std::vector<RungStats> out;
  for (const auto& rs : samples) {
    RungStats st;
    st.separation = rs.target_separation;
    st.median_separation = median(rs.separations);
    st.median_increment = median(rs.increments);
    for (std::size_t i = 0; i < rs.increments.size(); ++i) {
      st.max_increment = std::max(st.max_increment, rs.increments[i]);
      st.max_quotient = std::max(st.max_quotient, rs.increments[i] / std::pow(rs.separations[i], theta));
    }
    out.push_back(st);
  }
  return out;
}

/// Max over sampled pairs of |f(x)-f(y)| / |x-y|^θ.
inline HolderEstimate holder_seminorm(const SampledView& v, double theta, const SamplePairLadder& ladder,
                                      std::string field_id = {}) {
  detail::require(theta >= 0.0 && theta <= 1.0, "holder_seminorm: probe exponent must lie in [0,1]");
  HolderEstimate e{theta, 0.0, ladder, std::move(field_id), rung_statistics(sample_pairs(v, ladder), theta)};
  for (const auto& r : e.rungs) e.seminorm = std::max(e.seminorm, r.max_quotient);
  return e;
}

inline HolderEstimate holder_seminorm(const SpectralField& f, double theta, const SamplePairLadder& ladder,
                                      std::string field_id = {}) {
  const auto s = to_samples(f);
  return holder_seminorm(SampledView::of(s), theta, ladder, std::move(field_id));
}

/// Slope of log(median increment) against log(median realized separation).
inline ExponentFit exponent_fit(const std::vector<RungSample>& samples) {
  if (samples.size() < 4) {
    throw PreconditionError("holder_exponent_estimate: need at least 4 ladder rungs, got " +
                            std::to_string(samples.size()));
  }
  ExponentFit fit;
  for (const auto& rs : samples) {
    const double m = median(rs.increments);
    if (!(m > 0.0)) {
      throw NumericalError("holder_exponent_estimate: zero median increment at separation " +
                           std::to_string(rs.target_separation) + " (constant field?)");
    }
    fit.separations_used.push_back(median(rs.separations));
    fit.median_increments.push_back(m);
  }
  const auto lf = fit_loglog(fit.separations_used, fit.median_increments);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r_squared;
  return fit;
}

inline ExponentFit holder_exponent_estimate(const SampledView& v, const SamplePairLadder& ladder) {
  return exponent_fit(sample_pairs(v, ladder));
}

inline ExponentFit holder_exponent_estimate(const SpectralField& f, const SamplePairLadder& ladder) {
  const auto s = to_samples(f);
  return holder_exponent_estimate(SampledView::of(s), ladder);
}

/// Max over samples of the Euclidean norm across components.
inline double c0_norm(const SampledView& v) {
  const std::size_t sz = v.size();
  double m = 0.0;
  for (std::size_t q = 0; q < sz; ++q) {
    double a = 0.0;
    for (std::size_t c = 0; c < v.num_components; ++c) a += v.values[c * sz + q] * v.values[c * sz + q];
    m = std::max(m, a);
  }
  return std::sqrt(m);
}

inline double c0_norm(const GridSamples& s) { return c0_norm(SampledView::of(s)); }
inline double c0_norm(const SpectralField& f) { return c0_norm(to_samples(f)); }

}  // namespace holderlab
