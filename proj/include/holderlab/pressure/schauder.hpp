#pragma once

// Measured Hölder gain of the pressure over rough divergence-free velocities.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/norms/regression.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/pressure/solvers.hpp"
#include "holderlab/rough_field.hpp"

namespace holderlab {

struct SchauderConfig {
  int n = 128;
  int octaves = -1;  // -1: the largest the grid allows
  int modes_per_octave = 8;
  int pairs_per_separation = 4096;
  std::uint64_t ladder_seed = 1;
};

struct SchauderSeed {
  std::uint64_t seed = 0;
  ExponentFit u, p;
  ExponentFit grad_p;  // only when θ > 1/2
};

struct SchauderReport {
  double theta = 0.0;
  bool gradient = false;  // summary refers to ∇p (θ > 1/2)
  std::vector<SchauderSeed> seeds;
  double median_theta_u = 0.0;
  double median_theta_p = 0.0;
  double median_theta_grad_p = 0.0;
  ScalingReport summary;  // slope/intercept/r² medians of the target quantity
  std::size_t n_seeds() const { return seeds.size(); }
};

inline SchauderReport schauder_gain_experiment(double theta, const std::vector<std::uint64_t>& seeds,
                                               const SchauderConfig& cfg = {}) {
  if (std::abs(theta - 0.5) < 1e-12) {
    throw PreconditionError(
        "schauder_gain_experiment: theta = 1/2 is the borderline case where the C^{2θ} pressure bound is not "
        "expected to hold (2θ = 1 is not a Hölder exponent); use theta < 1/2 or theta > 1/2");
  }
  detail::require(theta > 0.0 && theta < 1.0, "schauder_gain_experiment: theta must lie in (0,1)");
  detail::require(!seeds.empty(), "schauder_gain_experiment: need at least one seed");
  const GridSpec g(cfg.n);
  const auto ladder = SamplePairLadder::dyadic(g, std::numbers::pi / 2, cfg.pairs_per_separation, cfg.ladder_seed);
  SchauderReport rep;
  rep.theta = theta;
  rep.gradient = theta > 0.5;
  std::vector<double> tu, tp, tg, ic, r2;
  for (auto s : seeds) {
    RandomFieldSpec spec;
    spec.theta = theta;
    spec.octaves = cfg.octaves < 0 ? max_octaves(g) : cfg.octaves;
    spec.modes_per_octave = cfg.modes_per_octave;
    spec.seed = s;
    const auto u = make_rough_field(spec, g, Rank::vector);
    const auto p = solve_pressure(u);
    SchauderSeed row;
    row.seed = s;
    row.u = holder_exponent_estimate(u, ladder);
    row.p = holder_exponent_estimate(p, ladder);
    tu.push_back(row.u.slope);
    tp.push_back(row.p.slope);
    if (rep.gradient) {
      row.grad_p = holder_exponent_estimate(grad(p), ladder);
      tg.push_back(row.grad_p.slope);
    }
    const ExponentFit& target = rep.gradient ? row.grad_p : row.p;
    ic.push_back(target.intercept);
    r2.push_back(target.r_squared);
    rep.seeds.push_back(std::move(row));
  }
  rep.median_theta_u = median(tu);
  rep.median_theta_p = median(tp);
  if (rep.gradient) rep.median_theta_grad_p = median(tg);
  rep.summary.quantity = rep.gradient ? "grad_p" : "p";
  rep.summary.target = rep.gradient ? 2.0 * theta - 1.0 : 2.0 * theta;
  rep.summary.slope = rep.gradient ? rep.median_theta_grad_p : rep.median_theta_p;
  rep.summary.intercept = median(ic);
  rep.summary.r_squared = median(r2);
  rep.summary.x = tu;
  rep.summary.y = rep.gradient ? tg : tp;
  return rep;
}

}  // namespace holderlab
