#pragma once

// Mollified energy identity
//   d/dt ½∫|u_δ|^2 + ν∫|(-Δ)^{α/2} u_δ|^2 = -∫ R_δ : ∇u_δ
// and the flux term's scaling in δ on frozen fields.

#include <algorithm>
#include <cmath>
#include <vector>

#include "holderlab/dynamics/energy.hpp"
#include "holderlab/dynamics/solver.hpp"
#include "holderlab/norms/regression.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/operators/mollifier.hpp"

namespace holderlab {

/// -∫ R_δ : ∇u_δ.
inline double energy_flux(const SpectralField& u, const MollifierSpec& m) {
  const auto ud = mollify(u, m);
  return -contract_integral(reynolds_stress(u, m), grad(ud));
}

struct IdentityReport {
  std::vector<double> times;  // interior snapshot times
  std::vector<double> lhs, rhs, residual, relative;
  double floor = 0.0;
  double max_relative() const { return relative.empty() ? 0.0 : *std::max_element(relative.begin(), relative.end()); }
};

/// LHS by centred differences of ½‖u_δ‖^2 over consecutive snapshots (uniform
/// spacing required), RHS by Parseval. Relative residuals use
/// max(|LHS|, |RHS|, floor) with floor = 1e-12 max(1, e(0)).
inline IdentityReport mollified_energy_identity(const Trajectory& traj, const MollifierSpec& m) {
  detail::require(traj.size() >= 3, "mollified_energy_identity: need at least three snapshots");
  detail::check_mollifier(m, traj.config.grid);
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    detail::require(std::abs((traj.times[k + 1] - traj.times[k]) - dt) <= 1e-9 * dt,
                    "mollified_energy_identity: snapshots must be uniformly spaced");
  }
  const double nu = traj.config.nu, alpha = traj.config.alpha;
  std::vector<double> e;
  for (const auto& u : traj.snapshots) e.push_back(kinetic_energy(mollify(u, m)));
  IdentityReport r;
  r.floor = 1e-12 * std::max(1.0, e[0]);
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const auto& u = traj.snapshots[k];
    double lhs = (e[k + 1] - e[k - 1]) / (2.0 * dt);
    if (nu > 0.0) lhs += nu * dissipation_rate(mollify(u, m), alpha);
    const double rhs = energy_flux(u, m);
    r.times.push_back(traj.times[k]);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    r.residual.push_back(lhs - rhs);
    r.relative.push_back(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), r.floor}));
  }
  return r;
}

/// |∫ R_δ : ∇u_δ| against δ on a frozen field.
inline ScalingReport flux_scan(const SpectralField& u, const std::vector<double>& deltas, double target,
                               MollifierSpec base = {}) {
  std::vector<double> x, y;
  for (double d : deltas) {
    base.delta = d;
    x.push_back(d);
    y.push_back(std::abs(energy_flux(u, base)));
  }
  return make_scaling_report("flux", target, std::move(x), std::move(y));
}

}  // namespace holderlab
