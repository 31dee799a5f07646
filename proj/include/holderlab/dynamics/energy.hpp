#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "holderlab/dynamics/solver.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// e = ½ ∫ |u|^2.
inline double kinetic_energy(const SpectralField& u) { return 0.5 * inner_product(u, u); }

/// ∫ |(-Δ)^{α/2} u|^2 = (2π)^3 Σ |k|^{2α} |u(k)|^2.
inline double dissipation_rate(const SpectralField& u, double alpha) {
  double acc = 0.0;
  const std::size_t sz = u.grid().size();
  const auto c = u.coeffs();
  for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
    if (k2 == 0.0) return;
    double a = 0.0;
    for (std::size_t q = 0; q < u.num_components(); ++q) a += std::norm(c[q * sz + idx]);
    acc += std::pow(k2, alpha) * a;
  });
  return std::pow(kTwoPi, 3) * acc;
}

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> kinetic;      // e_u(t)
  std::vector<double> dissipation;  // ν ∫_0^t ‖(-Δ)^{α/2} u‖^2 (trapezoid)
  std::vector<double> total;        // E_u(t) = e_u + dissipation

  /// max |E_u(t_{k+1}) - E_u(t_k)| / (Δt e_u(0)).
  double max_balance_rate() const {
    double m = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double e0 = kinetic.empty() || kinetic[0] == 0.0 ? 1.0 : kinetic[0];
      m = std::max(m, std::abs(total[k] - total[k - 1]) / ((times[k] - times[k - 1]) * e0));
    }
    return m;
  }

  void write_csv(std::ostream& os) const {
    os << "t,kinetic,dissipation,total\n" << std::setprecision(17);
    for (std::size_t k = 0; k < times.size(); ++k)
      os << times[k] << ',' << kinetic[k] << ',' << dissipation[k] << ',' << total[k] << '\n';
  }
};

inline EnergyReport energy_ledger(const Trajectory& traj) {
  EnergyReport r;
  r.times = traj.times;
  const double nu = traj.config.nu, alpha = traj.config.alpha;
  double acc = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double e = kinetic_energy(traj.snapshots[k]);
    const double d = nu > 0.0 ? nu * dissipation_rate(traj.snapshots[k], alpha) : 0.0;
    if (k > 0) acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (d + prev);
    prev = d;
    r.kinetic.push_back(e);
    r.dissipation.push_back(acc);
    r.total.push_back(e + acc);
  }
  return r;
}

}  // namespace holderlab
