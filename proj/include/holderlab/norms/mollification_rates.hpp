#pragma once

// Log-log rates of the basic mollification estimates over a δ ladder:
//   ‖f_δ - f‖ ~ δ^θ,  ‖∇f_δ‖ ~ δ^{θ-1},  ‖f_δ⊗f_δ - (f⊗f)_δ‖ ~ δ^{2θ}
// in C^0 and in L^p.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/norms/besov.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/norms/regression.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/operators/mollifier.hpp"
#include "holderlab/samples.hpp"

namespace holderlab {

struct MollificationRateReport {
  double theta = 0.0;
  std::vector<double> deltas;
  int subgrid_rungs = 0;  // rungs with δ < 2h (the kernel is then narrower than two cells)
  std::vector<ScalingReport> quantities;

  const ScalingReport& at(std::string_view name) const {
    for (const auto& q : quantities)
      if (q.quantity == name) return q;
    throw PreconditionError("MollificationRateReport: no quantity " + std::string(name));
  }
};

inline std::string lp_suffix(double p) { return p == 1.5 ? "L1.5" : "L" + std::to_string(static_cast<int>(p)); }

/// Measures the rates on u (scalar or vector). Rungs below 2h are evaluated with
/// the exact multiplier of the trigonometric interpolant and counted in subgrid_rungs.
inline MollificationRateReport mollification_rate_scan(const SpectralField& u, double theta,
                                                       const std::vector<double>& deltas,
                                                       const std::vector<double>& ps = {1.5, 3.0}) {
  detail::require(u.rank() == Rank::scalar || u.rank() == Rank::vector,
                  "mollification_rate_scan: expected a scalar or vector field");
  detail::require(theta > 0.0 && theta < 1.0, "mollification_rate_scan: theta must lie in (0,1)");
  detail::require(deltas.size() >= 2, "mollification_rate_scan: need at least two ladder rungs");
  for (double p : ps) {
    detail::require(p == 1.5 || p == 2.0 || p == 3.0, "mollification_rate_scan: p must be 3/2, 2 or 3");
  }
  MollificationRateReport rep;
  rep.theta = theta;
  rep.deltas = deltas;
  const double two_h = 2.0 * u.grid().spacing();
  const auto uu = multiply(u, u);
  const std::size_t np = ps.size();
  std::vector<double> c0_err, c1, c0_r;
  std::vector<std::vector<double>> lp_err(np), lp_grad(np), lp_r(np);
  for (double d : deltas) {
    MollifierSpec m;
    m.delta = d;
    m.allow_subgrid = d < two_h * (1.0 - 1e-12);
    if (m.allow_subgrid) ++rep.subgrid_rungs;
    const auto ud = mollify(u, m);
    auto r = multiply(ud, ud);
    r -= mollify(uu, m);
    const auto err = to_samples(ud - u);
    const auto g = to_samples(grad(ud));
    const auto rs = to_samples(r);
    c0_err.push_back(c0_norm(err));
    c1.push_back(c0_norm(g));
    c0_r.push_back(c0_norm(rs));
    for (std::size_t k = 0; k < np; ++k) {
      lp_err[k].push_back(lp_norm(err, ps[k]));
      lp_grad[k].push_back(lp_norm(g, ps[k]));
      lp_r[k].push_back(lp_norm(rs, ps[k]));
    }
  }
  rep.quantities.push_back(make_scaling_report("C0_error", theta, deltas, c0_err));
  rep.quantities.push_back(make_scaling_report("C1_norm", theta - 1.0, deltas, c1));
  rep.quantities.push_back(make_scaling_report("C0_commutator", 2.0 * theta, deltas, c0_r));
  for (std::size_t k = 0; k < np; ++k) {
    const auto sfx = lp_suffix(ps[k]);
    rep.quantities.push_back(make_scaling_report(sfx + "_error", theta, deltas, lp_err[k]));
    rep.quantities.push_back(make_scaling_report(sfx + "_gradient", theta - 1.0, deltas, lp_grad[k]));
    rep.quantities.push_back(make_scaling_report(sfx + "_commutator", 2.0 * theta, deltas, lp_r[k]));
  }
  return rep;
}

}  // namespace holderlab
