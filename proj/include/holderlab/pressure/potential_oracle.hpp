#pragma once

// Real-space evaluation of the decaying solution of -Δp = div div R on R^3 for
// a compactly supported symmetric R:
//
//   p(x) = ∫_B ∂_ij Φ(x-y) (R_ij(y) - R_ij(x)) dy - R_ij(x) ∫_∂B ∂_iΦ(x-y) ν_j dS_y,
//
// Φ = 1/(4π|x|), B = B_R0(x0). Both integrals use spherical coordinates
// centred at x, so the kernel singularity is absorbed by the Jacobian.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/quadrature.hpp"
#include "holderlab/random.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

using Tensor3x3 = std::array<double, 9>;  // row-major, R_ij at tidx(i, j)
using StressFunction = std::function<Tensor3x3(const Vec3&)>;

struct PotentialOracleConfig {
  double support_radius = 12.5;  // R0
  Vec3 center{0.0, 0.0, 0.0};    // x0
  int radial_panels = 8;         // composite Gauss-Legendre along each ray
  int radial_points = 8;
  int polar_points = 24;    // Gauss-Legendre in cos(polar angle)
  int azimuth_points = 48;  // trapezoid, even
  double boundary_margin = 1.0;

  void validate() const {
    detail::require(support_radius > 0.0, "PotentialOracleConfig: support_radius must be positive");
    detail::require(radial_panels >= 1 && radial_points >= 2 && polar_points >= 2,
                    "PotentialOracleConfig: quadrature sizes too small");
    detail::require(azimuth_points >= 4 && azimuth_points % 2 == 0,
                    "PotentialOracleConfig: azimuth_points must be even and >= 4");
    detail::require(boundary_margin > 0.0 && boundary_margin < support_radius,
                    "PotentialOracleConfig: boundary_margin must lie in (0, R0)");
  }
};

namespace detail {

struct SphereRule {
  std::vector<Vec3> dirs;
  std::vector<double> weights;
};

// Symmetric under ω -> -ω, which cancels the odd leading term of the volume integrand.
inline SphereRule sphere_rule(int polar, int azimuth) {
  const auto mu = gauss_legendre(polar);
  SphereRule s;
  const double dphi = kTwoPi / azimuth;
  for (std::size_t a = 0; a < mu.nodes.size(); ++a) {
    const double ct = mu.nodes[a], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < azimuth; ++b) {
      const double ph = b * dphi;
      s.dirs.push_back({st * std::cos(ph), st * std::sin(ph), ct});
      s.weights.push_back(mu.weights[a] * dphi);
    }
  }
  return s;
}

// Distance from x (inside the ball) to the sphere along ω.
inline double ray_exit(const Vec3& d, const Vec3& w, double r0) {
  const double b = d[0] * w[0] + d[1] * w[1] + d[2] * w[2];
  const double c = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - r0 * r0;
  return -b + std::sqrt(b * b - c);
}

}  // namespace detail

/// M_ij(x) = ∫_∂B ∂_iΦ(x-y) ν_j dS_y, so the boundary term is -R_ij(x) M_ij(x).
inline Tensor3x3 potential_boundary_matrix(const Vec3& x, const PotentialOracleConfig& cfg) {
  cfg.validate();
  const auto rule = detail::sphere_rule(cfg.polar_points, cfg.azimuth_points);
  const Vec3 d{x[0] - cfg.center[0], x[1] - cfg.center[1], x[2] - cfg.center[2]};
  Tensor3x3 m{};
  for (std::size_t q = 0; q < rule.dirs.size(); ++q) {
    const Vec3& w = rule.dirs[q];
    const double rho = detail::ray_exit(d, w, cfg.support_radius);
    Vec3 nu;
    for (int c = 0; c < 3; ++c) nu[c] = (d[c] + rho * w[c]) / cfg.support_radius;
    const double wn = w[0] * nu[0] + w[1] * nu[1] + w[2] * nu[2];
    // ∂_iΦ(x-y) dS = ω_i / (4π ρ^2) * ρ^2 dω / (ω·ν)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[tidx(i, j)] += rule.weights[q] * w[i] * nu[j] / (4.0 * std::numbers::pi * wn);
  }
  return m;
}

/// Oracle values p(x) at the given points.
inline std::vector<double> potential_oracle_p(const StressFunction& stress, std::span<const Vec3> points,
                                              const PotentialOracleConfig& cfg) {
  cfg.validate();
  const auto rule = detail::sphere_rule(cfg.polar_points, cfg.azimuth_points);
  const auto base = gauss_legendre(cfg.radial_points);
  const double r0 = cfg.support_radius;
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& x : points) {
    const Vec3 d{x[0] - cfg.center[0], x[1] - cfg.center[1], x[2] - cfg.center[2]};
    const double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (dist > r0 - cfg.boundary_margin) {
      throw PreconditionError("potential_oracle_p: evaluation point at distance " + std::to_string(r0 - dist) +
                              " from the support boundary is inside the boundary layer (margin " +
                              std::to_string(cfg.boundary_margin) + ")");
    }
    const Tensor3x3 rx = stress(x);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (std::abs(rx[tidx(i, j)] - rx[tidx(j, i)]) > 1e-12 * (1.0 + std::abs(rx[tidx(i, j)])))
          throw PreconditionError("potential_oracle_p: stress tensor is not symmetric");

    double vol = 0.0;
    for (std::size_t q = 0; q < rule.dirs.size(); ++q) {
      const Vec3& w = rule.dirs[q];
      const double rho = detail::ray_exit(d, w, r0);
      Tensor3x3 kern;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          kern[tidx(i, j)] = (3.0 * w[i] * w[j] - (i == j ? 1.0 : 0.0)) / (4.0 * std::numbers::pi);
      const double pw = rho / cfg.radial_panels;
      double ray = 0.0;
      for (int pnl = 0; pnl < cfg.radial_panels; ++pnl) {
        for (std::size_t k = 0; k < base.nodes.size(); ++k) {
          const double r = pw * (pnl + 0.5 * (base.nodes[k] + 1.0));
          const Tensor3x3 ry = stress({x[0] + r * w[0], x[1] + r * w[1], x[2] + r * w[2]});
          double s = 0.0;
          for (int c = 0; c < 9; ++c) s += kern[c] * (ry[c] - rx[c]);
          ray += 0.5 * pw * base.weights[k] * s / r;
        }
      }
      vol += rule.weights[q] * ray;
    }
    const Tensor3x3 m = potential_boundary_matrix(x, cfg);
    double bnd = 0.0;
    for (int c = 0; c < 9; ++c) bnd -= rx[c] * m[c];
    out.push_back(vol + bnd);
  }
  return out;
}

/// Seeded points uniform in the ball B_radius(center).
inline std::vector<Vec3> ball_points(std::size_t count, double radius, const Vec3& center, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Vec3> pts;
  while (pts.size() < count) {
    Vec3 v{rng.symmetric(), rng.symmetric(), rng.symmetric()};
    if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] > 1.0) continue;
    pts.push_back({center[0] + radius * v[0], center[1] + radius * v[1], center[2] + radius * v[2]});
  }
  return pts;
}

/// The nine harmonic polynomials of degree <= 2.
inline std::array<double, 9> harmonic_basis(const Vec3& x) {
  return {1.0, x[0], x[1], x[2], x[0] * x[1], x[1] * x[2], x[0] * x[2], x[0] * x[0] - x[1] * x[1],
          x[1] * x[1] - x[2] * x[2]};
}

/// Least-squares harmonic quadratic h through (points, values); returns values - h.
inline std::vector<double> subtract_harmonic_fit(std::span<const Vec3> points, std::span<const double> values) {
  detail::require(points.size() == values.size() && points.size() >= 9,
                  "subtract_harmonic_fit: need at least nine matching samples");
  Eigen::MatrixXd a(points.size(), 9);
  Eigen::VectorXd b(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto h = harmonic_basis(points[i]);
    for (int c = 0; c < 9; ++c) a(static_cast<Eigen::Index>(i), c) = h[c];
    b(static_cast<Eigen::Index>(i)) = values[i];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * coef;
  return {res.data(), res.data() + res.size()};
}

}  // namespace holderlab
