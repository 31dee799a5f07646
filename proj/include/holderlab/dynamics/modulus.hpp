#pragma once

// Time moduli along trajectories: the δ-optimized split of u(t) - u(s) and the
// energy-increment inequality.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "holderlab/dynamics/energy.hpp"
#include "holderlab/dynamics/solver.hpp"
#include "holderlab/norms/besov.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/norms/regression.hpp"
#include "holderlab/operators/mollifier.hpp"

namespace holderlab {

namespace detail {

inline double uniform_spacing(const Trajectory& traj, const char* what) {
  detail::require(traj.size() >= 2, std::string(what) + ": need at least two snapshots");
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    detail::require(std::abs((traj.times[k + 1] - traj.times[k]) - dt) <= 1e-9 * dt,
                    std::string(what) + ": snapshots must be uniformly spaced");
  }
  return dt;
}

// Dyadic snapshot gaps 1, 2, 4, ... below `limit` snapshots.
inline std::vector<std::size_t> dyadic_gaps(std::size_t limit) {
  std::vector<std::size_t> g;
  for (std::size_t s = 1; s < limit; s *= 2) g.push_back(s);
  return g;
}

}  // namespace detail

struct TimeModulusPair {
  double s = 0.0, t = 0.0;
  double measured = 0.0;  // sup_x |u(t) - u(s)|
  double majorant = 0.0;  // ‖u(t)-u_δ(t)‖ + ‖u(s)-u_δ(s)‖ + |t-s| max ‖∂_t u_δ‖, δ = |t-s|
};

struct TimeModulusReport {
  double theta_probe = 0.0;
  std::vector<TimeModulusPair> pairs;
  std::vector<double> gaps, max_measured;  // per gap
  bool fit_valid = false;                  // false when some gap has zero modulus
  ScalingReport fit;
  double holder_quotient = 0.0;  // max measured / |t-s|^θ
  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) m = std::min(m, p.majorant - p.measured);
    return m;
  }
  bool majorant_holds() const { return min_margin() >= 0.0; }
};

/// Pairs (i, i+g) for dyadic snapshot gaps g with g·Δt < π, at most
/// `pairs_per_gap` evenly spread starting points per gap.
inline TimeModulusReport time_modulus_scan(const Trajectory& traj, double theta_probe, int pairs_per_gap = 16) {
  if (traj.size() < 8) {
    throw PreconditionError("time_modulus_scan: need at least 8 snapshots, got " + std::to_string(traj.size()));
  }
  detail::require(theta_probe > 0.0 && theta_probe <= 1.0, "time_modulus_scan: theta_probe must lie in (0,1]");
  detail::require(pairs_per_gap >= 1, "time_modulus_scan: pairs_per_gap must be positive");
  const double dt = detail::uniform_spacing(traj, "time_modulus_scan");
  const std::size_t n = traj.size();
  std::vector<SpectralField> tendency;
  // the simulated flow is the Galerkin truncation, so its tendency is truncated too
  for (const auto& u : traj.snapshots)
    tendency.push_back(dealias_truncate(velocity_tendency(u, traj.config.nu, traj.config.alpha)));

  TimeModulusReport rep;
  rep.theta_probe = theta_probe;
  for (std::size_t g : detail::dyadic_gaps(n)) {
    const double gap = static_cast<double>(g) * dt;
    if (gap >= std::numbers::pi) break;
    MollifierSpec m;
    m.delta = gap;
    m.allow_subgrid = true;
    // per-snapshot pieces at this δ
    std::vector<double> rough(n), tend(n);
    for (std::size_t k = 0; k < n; ++k) {
      rough[k] = c0_norm(traj.snapshots[k] - mollify(traj.snapshots[k], m));
      tend[k] = c0_norm(mollify(tendency[k], m));
    }
    const std::size_t starts = n - g;
    const std::size_t step = std::max<std::size_t>(1, starts / static_cast<std::size_t>(pairs_per_gap));
    double gmax = 0.0;
    for (std::size_t i = 0; i < starts; i += step) {
      const std::size_t j = i + g;
      TimeModulusPair p;
      p.s = traj.times[i];
      p.t = traj.times[j];
      p.measured = c0_norm(traj.snapshots[j] - traj.snapshots[i]);
      const double tmax = *std::max_element(tend.begin() + static_cast<std::ptrdiff_t>(i),
                                            tend.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      p.majorant = rough[i] + rough[j] + gap * tmax;
      gmax = std::max(gmax, p.measured);
      rep.holder_quotient = std::max(rep.holder_quotient, p.measured / std::pow(gap, theta_probe));
      rep.pairs.push_back(p);
    }
    rep.gaps.push_back(gap);
    rep.max_measured.push_back(gmax);
  }
  detail::require(rep.gaps.size() >= 2, "time_modulus_scan: fewer than two usable gaps (|t-s| < pi)");
  rep.fit_valid = std::all_of(rep.max_measured.begin(), rep.max_measured.end(), [](double v) { return v > 0.0; });
  if (rep.fit_valid) {
    rep.fit = make_scaling_report("time_modulus", 1.0, rep.gaps, rep.max_measured);
  } else {
    rep.fit.quantity = "time_modulus";
    rep.fit.target = 1.0;
    rep.fit.x = rep.gaps;
    rep.fit.y = rep.max_measured;
  }
  return rep;
}

struct EnergyModulusReport {
  double theta = 0.0;
  double exponent = 0.0;          // 2θ/(1-θ), or 2(θ-α)/(1-3θ+2(θ-α)) when ν > 0
  bool total_energy = false;      // E_u (ν > 0) rather than e_u
  bool conservation_threshold = false;  // exponent == 1 (θ = 1/3 for Euler)
  double besov_seminorm = 0.0;    // sup over snapshots of [u]_{B^θ_{3,∞}}
  double constant = 0.0;          // smallest admissible C_θ over all pairs
  std::vector<double> gaps, max_increment;
  bool fit_valid = false;
  ScalingReport fit;
};

/// Exponent of the energy-increment bound; throws for inadmissible (θ, α).
inline double energy_modulus_exponent(double theta, double nu, double alpha) {
  detail::require(theta > 0.0 && theta < 1.0, "energy_modulus_scan: theta must lie in (0,1)");
  if (nu == 0.0) return 2.0 * theta / (1.0 - theta);
  if (theta <= alpha) {
    throw PreconditionError("energy_modulus_scan: theta=" + std::to_string(theta) + " must exceed alpha=" +
                            std::to_string(alpha) + " when nu > 0");
  }
  const double den = 1.0 - 3.0 * theta + 2.0 * (theta - alpha);
  if (den <= 0.0) {
    throw PreconditionError("energy_modulus_scan: exponent denominator 1-3θ+2(θ-α)=" + std::to_string(den) +
                            " is not positive for theta=" + std::to_string(theta) + ", alpha=" +
                            std::to_string(alpha));
  }
  return 2.0 * (theta - alpha) / den;
}

/// |e(t)-e(s)| <= C_θ([u]^2 + [u]^3)|t-s|^β over all snapshot pairs at the
/// given gaps (multiples of the snapshot spacing).
inline EnergyModulusReport energy_modulus_scan(const Trajectory& traj, double theta, const std::vector<double>& gaps) {
  const double nu = traj.config.nu;
  EnergyModulusReport rep;
  rep.theta = theta;
  rep.exponent = energy_modulus_exponent(theta, nu, traj.config.alpha);
  rep.total_energy = nu > 0.0;
  rep.conservation_threshold = std::abs(rep.exponent - 1.0) < 1e-9;
  detail::require(!gaps.empty(), "energy_modulus_scan: empty gap ladder");
  const double dt = detail::uniform_spacing(traj, "energy_modulus_scan");
  const auto ledger = energy_ledger(traj);
  const auto& energy = rep.total_energy ? ledger.total : ledger.kinetic;
  for (const auto& u : traj.snapshots) rep.besov_seminorm = std::max(rep.besov_seminorm, besov_seminorm(u, theta, 3.0));
  const double b = rep.besov_seminorm;
  const double scale = b * b + b * b * b;
  for (double gap : gaps) {
    const double q = gap / dt;
    const auto g = static_cast<std::size_t>(std::llround(q));
    if (g == 0 || std::abs(q - static_cast<double>(g)) > 1e-6 || g >= traj.size()) {
      throw PreconditionError("energy_modulus_scan: gap " + std::to_string(gap) +
                              " is not a positive multiple of the snapshot spacing within the trajectory");
    }
    double m = 0.0;
    for (std::size_t i = 0; i + g < traj.size(); ++i) m = std::max(m, std::abs(energy[i + g] - energy[i]));
    rep.gaps.push_back(gap);
    rep.max_increment.push_back(m);
    if (scale > 0.0) rep.constant = std::max(rep.constant, m / (scale * std::pow(gap, rep.exponent)));
  }
  rep.fit_valid = rep.gaps.size() >= 2 &&
                  std::all_of(rep.max_increment.begin(), rep.max_increment.end(), [](double v) { return v > 0.0; });
  if (rep.fit_valid) {
    rep.fit = make_scaling_report(rep.total_energy ? "total_energy_increment" : "kinetic_energy_increment",
                                  rep.exponent, rep.gaps, rep.max_increment);
  } else {
    rep.fit.quantity = rep.total_energy ? "total_energy_increment" : "kinetic_energy_increment";
    rep.fit.target = rep.exponent;
    rep.fit.x = rep.gaps;
    rep.fit.y = rep.max_increment;
  }
  return rep;
}

}  // namespace holderlab
