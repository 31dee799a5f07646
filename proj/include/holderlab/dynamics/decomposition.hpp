#pragma once

// Five-term splitting of the mollified pressure increment. With W = div R_δ - ∇p_δ,
//   -Δp¹ = div div(R_δ(s) - R_δ(t))
//   -Δp² = ∫_s^t div div(W ⊗ u_δ + u_δ ⊗ W)
//     p³ = -∫_s^t q(u_δ, u_δ, u_δ),     -Δq = div div div(u_δ⊗u_δ⊗u_δ)
//   -Δp⁴ = ν ∫_s^t div div T^α(u_δ)
//   -Δp⁵ = -ν ∫_s^t div div (-Δ)^α(u_δ ⊗ u_δ)
// and p_δ(t) - p_δ(s) = p¹ + ... + p⁵ for solutions of the mollified equation.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "holderlab/dynamics/solver.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/operators/commutator.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/operators/mollifier.hpp"
#include "holderlab/pressure/solvers.hpp"

namespace holderlab {

struct DecompositionReport {
  double s = 0.0, t = 0.0;
  int intervals = 0;  // trapezoid intervals
  std::array<double, 5> term_norms{};  // ‖p^i‖_C0
  double increment_norm = 0.0;         // ‖p_δ(t) - p_δ(s)‖_C0
  double residual = 0.0;               // ‖p_δ(t) - p_δ(s) - Σ p^i‖_C0
  double floor = 0.0;
  double relative() const { return residual / (increment_norm + floor); }
};

namespace detail {

// a ⊗ b + b ⊗ a
inline SpectralField symmetrized_product(const SpectralField& a, const SpectralField& b) {
  auto ab = multiply(a, b);
  SpectralField out = ab;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      auto dst = out.component(tidx(i, j));
      const auto src = ab.component(tidx(j, i));
      for (std::size_t q = 0; q < dst.size(); ++q) dst[q] += src[q];
    }
  return out;
}

}  // namespace detail

/// Checks the splitting between snapshots s_index < t_index, using every
/// `stride`-th snapshot as a trapezoid node (at least two intervals).
inline DecompositionReport pressure_decomposition_check(const Trajectory& traj, const MollifierSpec& m,
                                                        std::size_t s_index, std::size_t t_index, int stride = 1) {
  detail::require(s_index <= t_index && t_index < traj.size(),
                  "pressure_decomposition_check: need s_index <= t_index < number of snapshots");
  detail::require(stride >= 1, "pressure_decomposition_check: stride must be positive");
  detail::check_mollifier(m, traj.config.grid);
  DecompositionReport rep;
  rep.s = traj.times[s_index];
  rep.t = traj.times[t_index];
  if (s_index == t_index) return rep;
  const std::size_t span = t_index - s_index;
  if (span % static_cast<std::size_t>(stride) != 0 || span / static_cast<std::size_t>(stride) < 2) {
    throw PreconditionError("pressure_decomposition_check: insufficient intermediate snapshots (" +
                            std::to_string(span) + " steps at stride " + std::to_string(stride) +
                            "; need a whole number of at least two trapezoid intervals)");
  }
  rep.intervals = static_cast<int>(span / static_cast<std::size_t>(stride));
  const GridSpec& g = traj.config.grid;
  const double nu = traj.config.nu, alpha = traj.config.alpha;

  auto p_delta = [&](const SpectralField& u) { return mollify(solve_pressure(u), m); };

  std::vector<std::size_t> nodes;
  for (std::size_t k = s_index; k <= t_index; k += static_cast<std::size_t>(stride)) nodes.push_back(k);
  SpectralField s2(g, Rank::tensor2), s4(g, Rank::tensor2), s5(g, Rank::tensor2), p3(g, Rank::scalar);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double left = i > 0 ? traj.times[nodes[i]] - traj.times[nodes[i - 1]] : 0.0;
    const double right = i + 1 < nodes.size() ? traj.times[nodes[i + 1]] - traj.times[nodes[i]] : 0.0;
    const double w = 0.5 * (left + right);
    const auto& u = traj.snapshots[nodes[i]];
    const auto ud = mollify(u, m);
    auto wfield = divergence(reynolds_stress(u, m));
    wfield -= grad(p_delta(u));
    s2 += w * detail::symmetrized_product(wfield, ud);
    p3 -= w * solve_q(ud, ud, ud);
    if (nu > 0.0) {
      s4 += (w * nu) * commutator_T(ud, ud, alpha);
      s5 -= (w * nu) * frac_laplacian_multiplier(multiply(ud, ud), alpha);
    }
  }
  const auto& us = traj.snapshots[s_index];
  const auto& ut = traj.snapshots[t_index];
  const auto p1 = solve_double_divergence(reynolds_stress(us, m) - reynolds_stress(ut, m));
  const auto p2 = solve_double_divergence(s2);
  const auto p4 = solve_double_divergence(s4);
  const auto p5 = solve_double_divergence(s5);
  const auto inc = p_delta(ut) - p_delta(us);
  const std::array<const SpectralField*, 5> terms{&p1, &p2, &p3, &p4, &p5};
  SpectralField sum(g, Rank::scalar);
  for (std::size_t i = 0; i < 5; ++i) {
    sum += *terms[i];
    rep.term_norms[i] = c0_norm(*terms[i]);
  }
  rep.increment_norm = c0_norm(inc);
  rep.residual = c0_norm(inc - sum);
  rep.floor = 1e-12 * std::max(1.0, c0_norm(p_delta(us)));
  return rep;
}

}  // namespace holderlab
