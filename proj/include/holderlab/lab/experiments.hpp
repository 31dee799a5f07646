#pragma once

// The experiment catalogue behind the CLI. Each planner reads and validates
// every parameter up front and returns the job that does the computing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <numbers>
#include <string>
#include <vector>

#include "holderlab/dynamics/decomposition.hpp"
#include "holderlab/dynamics/energy.hpp"
#include "holderlab/dynamics/identity.hpp"
#include "holderlab/dynamics/modulus.hpp"
#include "holderlab/dynamics/solver.hpp"
#include "holderlab/dynamics/trajectory_io.hpp"
#include "holderlab/lab/config.hpp"
#include "holderlab/lab/report.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/norms/mollification_rates.hpp"
#include "holderlab/operators/commutator.hpp"
#include "holderlab/operators/frac_laplacian.hpp"
#include "holderlab/pressure/extension.hpp"
#include "holderlab/pressure/schauder.hpp"
#include "holderlab/pressure/solvers.hpp"
#include "holderlab/random.hpp"
#include "holderlab/rough_field.hpp"
#include "holderlab/snapshot_io.hpp"

namespace holderlab::lab {

using Job = std::function<void(Report&, const std::filesystem::path&)>;
using Planner = std::function<Job(Config&, std::uint64_t seed)>;

namespace detail {

inline GridSpec read_grid(Config& c, int fallback) {
  const auto n = c.get_int("grid.n", fallback, 8, 1024);
  if (n % 2 != 0) throw ConfigError("config: grid.n must be even, got " + std::to_string(n));
  return GridSpec(static_cast<int>(n));
}

// Largest J whose shell components stay within `limit`.
inline int octaves_within(int limit) {
  int j = -1;
  while ((2 << (j + 1)) - 1 <= limit) ++j;
  return j;
}

inline RandomFieldSpec read_field(Config& c, const GridSpec& g, std::uint64_t seed, double theta_fallback,
                                  int octaves_fallback, int band_limit = -1) {
  RandomFieldSpec s;
  s.theta = c.get_double("field.theta", theta_fallback, 1e-6, 1.0 - 1e-6);
  const int top = band_limit < 0 ? max_octaves(g) : octaves_within(band_limit);
  s.octaves = static_cast<int>(c.get_int("field.octaves", octaves_fallback < 0 ? top : octaves_fallback, 0, 30));
  if (s.octaves > top) {
    throw ConfigError("config: field.octaves = " + std::to_string(s.octaves) + " exceeds the band limit " +
                      std::to_string(top) + " for n = " + std::to_string(g.n()));
  }
  s.modes_per_octave = static_cast<int>(c.get_int("field.modes_per_octave", 8, 1, 4096));
  s.amplitude = c.get_double("field.amplitude", 1.0, 0.0, 1e6);
  s.seed = seed;
  return s;
}

inline std::vector<std::uint64_t> replicas(Config& c, std::uint64_t seed, long long fallback) {
  const auto r = c.get_int("run.replicas", fallback, 1, 1000);
  std::vector<std::uint64_t> out;
  for (long long i = 0; i < r; ++i) out.push_back(seed + static_cast<std::uint64_t>(i));
  return out;
}

// Optional acceptance bound: absent keys add no check.
struct Bound {
  std::optional<double> lo, hi;
};

inline std::optional<double> opt_double(Config& c, const std::string& key, double lo = -1e300, double hi = 1e300) {
  if (!c.has(key)) return std::nullopt;
  return c.get_double(key, std::nullopt, lo, hi);
}

inline void check_max(Report& r, const std::string& name, double v, std::optional<double> hi) {
  if (hi) r.check(name, v, -std::numeric_limits<double>::infinity(), *hi);
}
inline void check_min(Report& r, const std::string& name, double v, std::optional<double> lo) {
  if (lo) r.check(name, v, *lo, std::numeric_limits<double>::infinity());
}

inline nlohmann::ordered_json fit_json(const ExponentFit& f) {
  return {{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"r_squared", number(f.r_squared)}};
}

inline SpectralField beltrami_field(const GridSpec& g, double amplitude) {
  // (0, sin x, cos x)
  SpectralField u(g, Rank::vector);
  u.at(1, 1, 0, 0) = Complex{0.0, -0.5 * amplitude};
  u.at(1, -1, 0, 0) = Complex{0.0, 0.5 * amplitude};
  u.at(2, 1, 0, 0) = 0.5 * amplitude;
  u.at(2, -1, 0, 0) = 0.5 * amplitude;
  return u;
}

struct FlowSetup {
  SolverConfig solver;
  std::string kind;
  RandomFieldSpec field;
  double amplitude = 1.0;

  SpectralField initial() const {
    if (kind == "beltrami") return beltrami_field(solver.grid, amplitude);
    return make_rough_field(field, solver.grid, Rank::vector);
  }
};

inline FlowSetup read_flow(Config& c, std::uint64_t seed, double dt, double t_end, int stride) {
  FlowSetup f;
  f.solver.grid = read_grid(c, 32);
  f.solver.dt = c.get_double("solver.dt", dt, 1e-9, 1.0);
  f.solver.t_end = c.get_double("solver.t_end", t_end, 0.0, 1e6);
  f.solver.nu = c.get_double("solver.nu", 0.0, 0.0, 1e6);
  f.solver.alpha = c.get_double("solver.alpha", 0.25, 1e-6, 0.5 - 1e-6);
  f.solver.snapshot_stride = static_cast<int>(c.get_int("solver.snapshot_stride", stride, 1, 100000000));
  c.get_choice("solver.dealias", {"two_thirds"}, std::string("two_thirds"));
  f.kind = c.get_choice("initial.kind", {"beltrami", "smooth"}, std::string("smooth"));
  if (f.kind == "beltrami") {
    f.amplitude = c.get_double("initial.amplitude", 1.0, 0.0, 1e6);
  } else {
    // the generator's shells must survive the two-thirds rule: components < n/3
    const int band = (f.solver.grid.n() - 1) / 3;
    f.field = read_field(c, f.solver.grid, seed, 0.5, std::min(1, octaves_within(band)), band);
  }
  try {
    f.solver.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return f;
}

inline void energy_table(Report& r, const EnergyReport& e, const std::string& name = "energy") {
  Table t{name, {"t", "kinetic", "dissipation", "total"}, {}};
  for (std::size_t k = 0; k < e.times.size(); ++k) t.rows.push_back({e.times[k], e.kinetic[k], e.dissipation[k], e.total[k]});
  r.table(std::move(t));
}

inline std::vector<double> pi_ladder(const std::vector<double>& exponents) {
  std::vector<double> d;
  for (double e : exponents) d.push_back(std::numbers::pi * std::pow(2.0, -e));
  return d;
}

inline std::array<int, 3> read_wavevector(Config& c, const std::string& key, const std::string& fallback) {
  const auto v = c.get_doubles(key, std::nullopt);
  (void)fallback;
  if (v.size() != 3) throw ConfigError("config: " + key + " must have three components");
  std::array<int, 3> k{};
  for (int i = 0; i < 3; ++i) {
    if (v[i] != std::round(v[i])) throw ConfigError("config: " + key + " must be an integer vector");
    k[i] = static_cast<int>(v[i]);
  }
  return k;
}

}  // namespace detail

// --- gen-field --------------------------------------------------------------------------

inline Job plan_gen_field(Config& c, std::uint64_t seed) {
  const GridSpec g = detail::read_grid(c, 64);
  const auto spec = detail::read_field(c, g, seed, 0.4, -1);
  const Rank rank = c.get_choice("field.rank", {"scalar", "vector"}, std::string("vector")) == "vector" ? Rank::vector
                                                                                                       : Rank::scalar;
  const bool snapshot = c.get_bool("output.snapshot", true);
  const int pairs = static_cast<int>(c.get_int("ladder.pairs", 4096, 1, 1 << 24));
  const auto tol = detail::opt_double(c, "acceptance.exponent_tolerance", 0.0);
  const auto ladder = SamplePairLadder::dyadic(g, std::numbers::pi / 2, pairs, seed);
  const bool fit = ladder.separations.size() >= 4;
  if (tol && !fit) throw ConfigError("config: exponent checks need n >= 64 (at least 4 ladder rungs)");
  return [=](Report& r, const std::filesystem::path& out) {
    const auto u = make_rough_field(spec, g, rank);
    if (snapshot) write_snapshot(out / "field.hld1", u);
    r.result("c0_norm", c0_norm(u));
    r.result("l2_norm", l2_norm(u));
    if (rank == Rank::vector) r.result("relative_divergence", relative_divergence(u));
    if (fit) {
      const auto e = holder_exponent_estimate(u, ladder);
      r.scaling(make_scaling_report("median_increment", spec.theta, e.separations_used, e.median_increments),
                "separation", "median_increment");
      r.result("holder_seminorm", holder_seminorm(u, spec.theta, ladder).seminorm);
      if (tol) r.check("holder_exponent", e.slope, spec.theta - *tol, spec.theta + *tol);
    }
    if (snapshot) r.result("snapshot", "field.hld1");
  };
}

// --- mollify-scan -----------------------------------------------------------------------

inline Job plan_mollify_scan(Config& c, std::uint64_t seed) {
  const GridSpec g = detail::read_grid(c, 128);
  const auto spec = detail::read_field(c, g, seed, 0.4, -1);
  const Rank rank = c.get_choice("field.rank", {"scalar", "vector"}, std::string("vector")) == "vector" ? Rank::vector
                                                                                                       : Rank::scalar;
  const auto exps = c.get_doubles("scan.delta_exponents", std::vector<double>{3, 4, 5, 6, 7, 8});
  const auto ps = c.get_doubles("scan.lp", std::vector<double>{1.5, 3.0});
  for (double p : ps)
    if (p != 1.5 && p != 2.0 && p != 3.0) throw ConfigError("config: scan.lp entries must be 1.5, 2 or 3");
  const auto deltas = detail::pi_ladder(exps);
  for (double d : deltas)
    if (!(d > 0.0 && d < std::numbers::pi)) throw ConfigError("config: scan.delta_exponents must give 0 < delta < pi");
  if (deltas.size() < 2) throw ConfigError("config: scan.delta_exponents needs at least two rungs");
  const auto tol = detail::opt_double(c, "acceptance.slope_tolerance", 0.0);
  // which quantities the tolerance applies to; all of them by default
  std::vector<std::string> checked;
  if (tol) {
    for (const auto& q : detail::split_list(c.get_string("acceptance.quantities", std::string("all"))))
      if (q != "all") checked.push_back(q);
  }
  const auto replicas = detail::replicas(c, seed, 1);
  return [=](Report& r, const std::filesystem::path&) {
    std::map<std::string, std::vector<double>> slopes;
    std::vector<std::pair<std::string, double>> order;  // quantity, target slope
    int subgrid = 0;
    for (auto s : replicas) {
      auto sp = spec;
      sp.seed = s;
      const auto rep = mollification_rate_scan(make_rough_field(sp, g, rank), spec.theta, deltas, ps);
      subgrid = rep.subgrid_rungs;
      for (const auto& q : rep.quantities) {
        if (!slopes.count(q.quantity)) order.push_back({q.quantity, q.target});
        slopes[q.quantity].push_back(q.slope);
        if (s == replicas.front()) r.scaling(q, "delta", q.quantity);
      }
    }
    r.result("subgrid_rungs", static_cast<double>(subgrid));
    r.result("two_h", 2.0 * g.spacing());
    nlohmann::ordered_json med;
    for (const auto& [name, target] : order) {
      const double m = median(slopes[name]);
      med[name] = detail::number(m);
      const bool wanted = checked.empty() || std::find(checked.begin(), checked.end(), name) != checked.end();
      if (tol && wanted) r.check(name + "_slope", m, target - *tol, target + *tol);
    }
    r.result("median_slopes", med);
    for (const auto& q : checked)
      if (!slopes.count(q)) throw PreconditionError("mollify-scan: acceptance.quantities names unknown quantity " + q);
  };
}

// --- fraclap-check ----------------------------------------------------------------------

inline Job plan_fraclap_check(Config& c, std::uint64_t seed) {
  const GridSpec g = detail::read_grid(c, 32);
  const auto spec = detail::read_field(c, g, seed, 0.5, std::min(2, detail::octaves_within(g.n() / 4)), g.n() / 4);
  FracLaplacianSpec fl;
  fl.alpha = c.get_double("fraclap.alpha", 0.25, 1e-6, 0.5 - 1e-6);
  fl.image_shells = static_cast<int>(c.get_int("fraclap.image_shells", 3, 1, 64));
  const auto compare = static_cast<int>(c.get_int("fraclap.compare_shells", 0, 0, 64));
  const auto max_err = detail::opt_double(c, "acceptance.max_relative_error", 0.0);
  const auto ratio_lo = detail::opt_double(c, "acceptance.shell_ratio_min");
  const auto ratio_hi = detail::opt_double(c, "acceptance.shell_ratio_max");
  if ((ratio_lo || ratio_hi) && compare == 0) throw ConfigError("config: shell ratio checks need fraclap.compare_shells");
  return [=](Report& r, const std::filesystem::path&) {
    const auto f = make_rough_field(spec, g);
    const auto a = frac_laplacian(f, {fl.alpha, FracRealization::fourier_multiplier, fl.image_shells});
    auto err = [&](int shells) {
      const auto b = frac_laplacian(f, {fl.alpha, FracRealization::singular_integral, shells});
      return l2_norm(a - b) / l2_norm(a);
    };
    const double e = err(fl.image_shells);
    r.result("relative_error", e);
    detail::check_max(r, "relative_error", e, max_err);
    if (compare > 0) {
      const double e2 = err(compare);
      r.result("relative_error_compare", e2);
      r.result("error_ratio", e2 / e);
      if (ratio_lo || ratio_hi)
        r.check("error_ratio", e2 / e, ratio_lo.value_or(-1e300), ratio_hi.value_or(1e300));
    }
    r.result("calibrated_constant", SingularIntegralLaplacian(fl.alpha, fl.image_shells).constant());
    r.result("analytic_constant", frac_laplacian_constant(fl.alpha));
  };
}

// --- commutator-check -------------------------------------------------------------------

inline Job plan_commutator_check(Config& c, std::uint64_t seed) {
  const GridSpec g = detail::read_grid(c, 16);
  const double alpha = c.get_double("commutator.alpha", 0.25, 1e-6, 0.5 - 1e-6);
  std::vector<std::pair<std::array<int, 3>, std::array<int, 3>>> pairs;
  const int limit = (g.n() / 2 - 1) / 2;  // |k_i| + |l_i| < n/2 keeps k+l off the Nyquist plane
  auto in_band = [&](const std::array<int, 3>& k) {
    return std::all_of(k.begin(), k.end(), [&](int v) { return std::abs(v) <= limit; });
  };
  if (c.has("commutator.k") || c.has("commutator.l")) {
    const auto k = detail::read_wavevector(c, "commutator.k", "");
    const auto l = detail::read_wavevector(c, "commutator.l", "");
    if (!in_band(k) || !in_band(l))
      throw ConfigError("config: commutator wavevectors need components within " + std::to_string(limit));
    pairs.push_back({k, l});
  }
  const auto random_pairs = c.get_int("commutator.random_pairs", pairs.empty() ? 50 : 0, 0, 100000);
  SplitMix64 rng(seed);
  auto draw = [&] {
    std::array<int, 3> k{};
    do {
      for (auto& v : k) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * limit + 1))) - limit;
    } while (k[0] == 0 && k[1] == 0 && k[2] == 0);
    return k;
  };
  for (long long p = 0; p < random_pairs; ++p) {
    const auto k = draw();
    const auto l = draw();
    pairs.push_back({k, l});
  }
  const auto max_err = detail::opt_double(c, "acceptance.max_error", 0.0);
  return [=](Report& r, const std::filesystem::path&) {
    SplitMix64 amp(seed ^ 0x9e3779b97f4a7c15ULL);
    double worst = 0.0;
    Table t{"pairs", {"kx", "ky", "kz", "lx", "ly", "lz", "factor", "max_error"}, {}};
    for (const auto& [k, l] : pairs) {
      SpectralField f(g, Rank::vector, false), h(g, Rank::vector, false);
      for (std::size_t i = 0; i < 3; ++i) {
        f.at(i, k[0], k[1], k[2]) = Complex{amp.symmetric(), amp.symmetric()};
        h.at(i, l[0], l[1], l[2]) = Complex{amp.symmetric(), amp.symmetric()};
      }
      const auto T = commutator_T(f, h, alpha);
      auto norm2 = [](const std::array<int, 3>& v) { return double(v[0]) * v[0] + double(v[1]) * v[1] + double(v[2]) * v[2]; };
      const std::array<int, 3> s{k[0] + l[0], k[1] + l[1], k[2] + l[2]};
      const double factor = std::pow(norm2(s), alpha) - std::pow(norm2(k), alpha) - std::pow(norm2(l), alpha);
      SpectralField expect(g, Rank::tensor2, false);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          expect.at(tidx(i, j), s[0], s[1], s[2]) = factor * f.at(i, k[0], k[1], k[2]) * h.at(j, l[0], l[1], l[2]);
      double e = 0.0;
      const auto a = std::as_const(T).coeffs();
      const auto b = std::as_const(expect).coeffs();
      for (std::size_t q = 0; q < a.size(); ++q) e = std::max(e, std::abs(a[q] - b[q]));
      worst = std::max(worst, e);
      t.rows.push_back({double(k[0]), double(k[1]), double(k[2]), double(l[0]), double(l[1]), double(l[2]), factor, e});
    }
    r.table(std::move(t));
    r.result("pairs", static_cast<double>(pairs.size()));
    r.result("max_error", worst);
    detail::check_max(r, "max_error", worst, max_err);
  };
}

// --- pressure-scan ----------------------------------------------------------------------

inline Job plan_pressure_scan(Config& c, std::uint64_t seed) {
  const auto target = c.get_choice("scan.target", {"pressure", "triple"}, std::string("pressure"));
  SchauderConfig sc;
  const GridSpec g = detail::read_grid(c, 128);
  sc.n = g.n();
  const double theta = c.get_double("field.theta", 0.35, 1e-6, 1.0 - 1e-6);
  sc.octaves = static_cast<int>(c.get_int("field.octaves", -1, -1, max_octaves(g)));
  sc.modes_per_octave = static_cast<int>(c.get_int("field.modes_per_octave", 8, 1, 4096));
  sc.pairs_per_separation = static_cast<int>(c.get_int("ladder.pairs", 4096, 1, 1 << 24));
  sc.ladder_seed = c.get_u64("ladder.seed", 1);
  const auto seeds = detail::replicas(c, seed, 10);
  if (SamplePairLadder::dyadic(g).separations.size() < 4) throw ConfigError("config: pressure-scan needs n >= 64");
  if (target == "pressure" && std::abs(theta - 0.5) < 1e-12)
    throw ConfigError("config: field.theta = 1/2 is the borderline case of the pressure gain");
  const auto theta_u_tol = detail::opt_double(c, "acceptance.theta_u_tolerance", 0.0);
  const auto min_p = detail::opt_double(c, "acceptance.min_theta_p");
  const auto min_gp = detail::opt_double(c, "acceptance.min_theta_grad_p");
  const auto min_q = detail::opt_double(c, "acceptance.min_theta_q");
  return [=](Report& r, const std::filesystem::path&) {
    Table t{"seeds", {"seed", "theta_u", "theta_target"}, {}};
    if (target == "pressure") {
      const auto rep = schauder_gain_experiment(theta, seeds, sc);
      for (const auto& s : rep.seeds)
        t.rows.push_back({static_cast<double>(s.seed), s.u.slope, rep.gradient ? s.grad_p.slope : s.p.slope});
      r.result("median_theta_u", rep.median_theta_u);
      r.result("median_theta_p", rep.median_theta_p);
      if (rep.gradient) r.result("median_theta_grad_p", rep.median_theta_grad_p);
      r.scaling(rep.summary, "separation", "median_increment");
      if (theta_u_tol) r.check("theta_u", rep.median_theta_u, theta - *theta_u_tol, theta + *theta_u_tol);
      detail::check_min(r, "theta_p", rep.median_theta_p, min_p);
      if (rep.gradient) detail::check_min(r, "theta_grad_p", rep.median_theta_grad_p, min_gp);
    } else {
      const auto ladder = SamplePairLadder::dyadic(g, std::numbers::pi / 2, sc.pairs_per_separation, sc.ladder_seed);
      std::vector<double> tu, tq;
      for (auto s : seeds) {
        RandomFieldSpec spec;
        spec.theta = theta;
        spec.octaves = sc.octaves < 0 ? max_octaves(g) : sc.octaves;
        spec.modes_per_octave = sc.modes_per_octave;
        spec.seed = s;
        const auto u = make_rough_field(spec, g, Rank::vector);
        const auto fu = holder_exponent_estimate(u, ladder);
        const auto fq = holder_exponent_estimate(solve_q(u, u, u), ladder);
        tu.push_back(fu.slope);
        tq.push_back(fq.slope);
        t.rows.push_back({static_cast<double>(s), fu.slope, fq.slope});
        if (s == seeds.front())
          r.scaling(make_scaling_report("q_increment", 3.0 * theta - 1.0, fq.separations_used, fq.median_increments),
                    "separation", "median_increment");
      }
      r.result("median_theta_u", median(tu));
      r.result("median_theta_q", median(tq));
      if (theta_u_tol) r.check("theta_u", median(tu), theta - *theta_u_tol, theta + *theta_u_tol);
      detail::check_min(r, "theta_q", median(tq), min_q);
    }
    r.table(std::move(t));
  };
}

// --- extend-check -----------------------------------------------------------------------

inline Job plan_extend_check(Config& c, std::uint64_t seed) {
  const GridSpec g = detail::read_grid(c, 32);
  const auto spec = detail::read_field(c, g, seed, 0.4, -1);
  const int pairs = static_cast<int>(c.get_int("ladder.pairs", 4096, 1, 1 << 24));
  const auto seeds = detail::replicas(c, seed, 5);
  const auto max_id = detail::opt_double(c, "acceptance.max_identity_error", 0.0);
  const auto max_div = detail::opt_double(c, "acceptance.max_divergence", 0.0);
  const auto max_out = detail::opt_double(c, "acceptance.max_outside", 0.0);
  const auto max_ratio = detail::opt_double(c, "acceptance.max_seminorm_ratio", 0.0);
  return [=](Report& r, const std::filesystem::path&) {
    Table t{"seeds", {"seed", "identity_error", "relative_divergence", "max_outside", "seminorm_ratio"}, {}};
    double wid = 0, wdiv = 0, wout = 0, wratio = 0;
    const auto ladder = SamplePairLadder::dyadic(g, std::numbers::pi / 2, pairs, 1);
    for (auto s : seeds) {
      auto sp = spec;
      sp.seed = s;
      const auto u = make_rough_field(sp, g, Rank::vector);
      const auto us = to_samples(u);
      const double scale = c0_norm(us);
      const auto e = extend_divfree(u);
      const int n = g.n();
      double id = 0.0, outside = 0.0;
      for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < e.dim(); ++j)
          for (int l = 0; l < e.dim(); ++l) {
            const Vec3 x = e.position(i, j, l);
            const double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            const Vec3 v = e.value(e.index(i, j, l));
            if (rr <= kExtensionInner) {
              auto w = [&](int a) { return ((a - e.half_width) % n + n) % n; };
              for (std::size_t comp = 0; comp < 3; ++comp)
                id = std::max(id, std::abs(v[comp] - us.at(comp, w(i), w(j), w(l))));
            } else if (rr >= kExtensionOuter) {
              outside = std::max(outside, norm(v));
            }
          }
      id /= scale;
      const double ratio = holder_seminorm(e.view(), spec.theta, ladder).seminorm /
                           holder_seminorm(SampledView::of(us), spec.theta, ladder).seminorm;
      t.rows.push_back({static_cast<double>(s), id, e.relative_divergence(), outside, ratio});
      wid = std::max(wid, id);
      wdiv = std::max(wdiv, e.relative_divergence());
      wout = std::max(wout, outside);
      wratio = std::max(wratio, ratio);
    }
    r.table(std::move(t));
    r.result("max_identity_error", wid);
    r.result("max_relative_divergence", wdiv);
    r.result("max_outside", wout);
    r.result("max_seminorm_ratio", wratio);
    detail::check_max(r, "identity_error", wid, max_id);
    detail::check_max(r, "relative_divergence", wdiv, max_div);
    detail::check_max(r, "outside_support", wout, max_out);
    detail::check_max(r, "seminorm_ratio", wratio, max_ratio);
  };
}

// --- simulate ---------------------------------------------------------------------------

inline Job plan_simulate(Config& c, std::uint64_t seed) {
  const auto flow = detail::read_flow(c, seed, 1e-3, 1.0, 100);
  const bool write_traj = c.get_bool("output.trajectory", true);
  const auto max_drift = detail::opt_double(c, "acceptance.max_energy_drift", 0.0);
  const auto max_decay = detail::opt_double(c, "acceptance.max_decay_error", 0.0);
  const auto max_ratio = detail::opt_double(c, "acceptance.max_kinetic_ratio_error", 0.0);
  if ((max_decay || max_ratio) && flow.kind != "beltrami")
    throw ConfigError("config: Beltrami decay checks need initial.kind = beltrami");
  return [=](Report& r, const std::filesystem::path& out) {
    const auto u0 = flow.initial();
    const auto tr = integrate(u0, flow.solver);
    const auto led = energy_ledger(tr);
    if (write_traj) write_trajectory(tr, out / "trajectory");
    detail::energy_table(r, led);
    const double e0 = led.kinetic.front(), e1 = led.kinetic.back();
    r.result("snapshots", static_cast<double>(tr.size()));
    r.result("kinetic_initial", e0);
    r.result("kinetic_final", e1);
    r.result("kinetic_ratio", e0 > 0 ? e1 / e0 : 0.0);
    r.result("max_balance_rate", led.max_balance_rate());
    r.result("final_relative_divergence", relative_divergence(tr.snapshots.back()));
    if (flow.solver.nu == 0.0) {
      const double drift = e0 > 0 ? std::abs(e1 - e0) / e0 : 0.0;
      r.result("relative_energy_drift", drift);
      detail::check_max(r, "relative_energy_drift", drift, max_drift);
    } else if (max_drift) {
      // with dissipation the conserved quantity is E_u = e_u + ν∫‖(-Δ)^{α/2}u‖²
      const double drift = e0 > 0 ? std::abs(led.total.back() - led.total.front()) / e0 : 0.0;
      r.result("relative_total_energy_drift", drift);
      detail::check_max(r, "relative_total_energy_drift", drift, max_drift);
    }
    if (flow.kind == "beltrami") {
      const double t = tr.times.back();
      const double decay = std::exp(-flow.solver.nu * t);  // |k| = 1
      const double err = l2_norm(tr.snapshots.back() - decay * u0) / l2_norm(u0);
      const double ratio_err = std::abs((e0 > 0 ? e1 / e0 : 0.0) - decay * decay);
      r.result("exact_kinetic_ratio", decay * decay);
      r.result("kinetic_ratio_error", ratio_err);
      r.result("decay_error", err);
      detail::check_max(r, "kinetic_ratio_error", ratio_err, max_ratio);
      detail::check_max(r, "decay_error", err, max_decay);
    }
    if (write_traj) r.result("trajectory", "trajectory/manifest.json");
  };
}

// --- energy-scan ------------------------------------------------------------------------

inline Job plan_energy_scan(Config& c, std::uint64_t seed) {
  const auto flow = detail::read_flow(c, seed, 1e-3, 1.0, 10);
  const double theta = c.get_double("scan.theta", 0.4, 1e-6, 1.0 - 1e-6);
  try {
    energy_modulus_exponent(theta, flow.solver.nu, flow.solver.alpha);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const double spacing = flow.solver.dt * flow.solver.snapshot_stride;
  std::vector<double> gaps;
  if (c.has("scan.gap_multiples")) {
    for (double m : c.get_doubles("scan.gap_multiples")) {
      if (m < 1 || m != std::round(m)) throw ConfigError("config: scan.gap_multiples must be positive integers");
      gaps.push_back(m * spacing);
    }
  } else {
    const long snaps = flow.solver.steps() / flow.solver.snapshot_stride;
    for (long m = 1; m < snaps; m *= 2) gaps.push_back(static_cast<double>(m) * spacing);
    c.get_doubles("scan.gap_multiples", [&] {
      std::vector<double> v;
      for (double gp : gaps) v.push_back(std::round(gp / spacing));
      return v;
    }());
  }
  if (gaps.empty()) throw ConfigError("config: energy-scan needs at least two snapshots");
  const bool time_modulus = c.get_bool("scan.time_modulus", true);
  const double probe = c.get_double("scan.theta_probe", 1.0, 1e-6, 1.0);
  const auto seeds = detail::replicas(c, seed, 1);
  const auto max_spread = detail::opt_double(c, "acceptance.max_constant_spread", 1.0);
  return [=](Report& r, const std::filesystem::path&) {
    Table t{"seeds", {"seed", "constant", "besov_seminorm", "fit_slope"}, {}};
    std::vector<double> constants;
    for (auto s : seeds) {
      auto f = flow;
      f.field.seed = s;
      const auto tr = integrate(f.initial(), f.solver);
      const auto rep = energy_modulus_scan(tr, theta, gaps);
      constants.push_back(rep.constant);
      t.rows.push_back({static_cast<double>(s), rep.constant, rep.besov_seminorm, rep.fit_valid ? rep.fit.slope : 0.0});
      if (s == seeds.front()) {
        r.result("exponent", rep.exponent);
        r.result("total_energy", rep.total_energy ? "E_u" : "e_u");
        r.result("conservation_threshold", nlohmann::ordered_json(rep.conservation_threshold));
        r.result("threshold_exponent_at_one_third", energy_modulus_exponent(1.0 / 3.0, 0.0, f.solver.alpha));
        Table inc{"energy_increments", {"gap", "max_increment"}, {}};
        for (std::size_t k = 0; k < rep.gaps.size(); ++k) inc.rows.push_back({rep.gaps[k], rep.max_increment[k]});
        r.table(std::move(inc));
        if (rep.fit_valid) r.scaling(rep.fit, "gap", "max_increment");
        detail::energy_table(r, energy_ledger(tr));
        if (time_modulus) {
          const auto tm = time_modulus_scan(tr, probe);
          r.result("time_modulus_min_margin", tm.min_margin());
          r.result("time_modulus_majorant_holds", nlohmann::ordered_json(tm.majorant_holds()));
          r.result("time_modulus_holder_quotient", tm.holder_quotient);
          if (tm.fit_valid) r.scaling(tm.fit, "gap", "max_sup_increment");
        }
      }
    }
    r.table(std::move(t));
    const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
    const double spread = *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    r.result("constant_min", *lo);
    r.result("constant_max", *hi);
    r.result("constant_spread", spread);
    detail::check_max(r, "constant_spread", spread, max_spread);
  };
}

// --- identity-check ---------------------------------------------------------------------

inline Job plan_identity_check(Config& c, std::uint64_t seed) {
  const auto flow = detail::read_flow(c, seed, 1e-3, 0.02, 1);
  const double cells = c.get_double("identity.delta_cells", 8.0, 2.0, 1e6);
  const auto refinements = c.get_int("identity.dt_refinements", 0, 0, 6);
  const bool flux = c.get_bool("flux.enabled", false);
  RandomFieldSpec flux_spec;
  GridSpec flux_grid(8);
  std::vector<double> flux_deltas;
  if (flux) {
    flux_grid = GridSpec(static_cast<int>(c.get_int("flux.n", 128, 8, 1024)));
    if (flux_grid.n() % 2) throw ConfigError("config: flux.n must be even");
    flux_spec.theta = c.get_double("flux.theta", 0.4, 1e-6, 1.0 - 1e-6);
    flux_spec.octaves = static_cast<int>(c.get_int("flux.octaves", max_octaves(flux_grid), 0, max_octaves(flux_grid)));
    flux_spec.modes_per_octave = static_cast<int>(c.get_int("flux.modes_per_octave", 8, 1, 4096));
    flux_spec.seed = seed;
    flux_deltas = detail::pi_ladder(c.get_doubles("flux.delta_exponents", std::vector<double>{2, 3, 4, 5}));
    for (double d : flux_deltas)
      if (d < 2.0 * flux_grid.spacing() * (1 - 1e-12) || d >= std::numbers::pi)
        throw ConfigError("config: flux.delta_exponents must give 2h <= delta < pi");
  }
  const double delta = cells * flow.solver.grid.spacing();
  if (delta >= std::numbers::pi) throw ConfigError("config: identity.delta_cells gives delta >= pi");
  const auto max_res = detail::opt_double(c, "acceptance.max_relative_residual", 0.0);
  const auto min_order = detail::opt_double(c, "acceptance.min_order");
  const auto min_flux = detail::opt_double(c, "acceptance.min_flux_slope");
  if (min_order && refinements == 0) throw ConfigError("config: acceptance.min_order needs identity.dt_refinements >= 1");
  if (min_flux && !flux) throw ConfigError("config: acceptance.min_flux_slope needs flux.enabled = true");
  return [=](Report& r, const std::filesystem::path&) {
    MollifierSpec m;
    m.delta = delta;
    r.result("delta", delta);
    Table t{"dt_ladder", {"dt", "max_relative_residual"}, {}};
    std::vector<double> res;
    for (long long k = 0; k <= refinements; ++k) {
      auto f = flow;
      f.solver.dt = flow.solver.dt / std::pow(2.0, static_cast<double>(k));
      f.solver.snapshot_stride = 1;
      const auto tr = integrate(f.initial(), f.solver);
      const auto rep = mollified_energy_identity(tr, m);
      res.push_back(rep.max_relative());
      t.rows.push_back({f.solver.dt, rep.max_relative()});
      if (k == 0) {
        Table steps{"residuals", {"t", "lhs", "rhs", "relative"}, {}};
        for (std::size_t q = 0; q < rep.times.size(); ++q)
          steps.rows.push_back({rep.times[q], rep.lhs[q], rep.rhs[q], rep.relative[q]});
        r.table(std::move(steps));
      }
    }
    r.table(std::move(t));
    r.result("max_relative_residual", res.front());
    detail::check_max(r, "max_relative_residual", res.front(), max_res);
    if (refinements > 0) {
      double order = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < res.size(); ++k) order = std::min(order, std::log2(res[k - 1] / res[k]));
      r.result("min_order", order);
      detail::check_min(r, "min_order", order, min_order);
    }
    if (flux) {
      const auto u = make_rough_field(flux_spec, flux_grid, Rank::vector);
      const auto fr = flux_scan(u, flux_deltas, 3.0 * flux_spec.theta - 1.0);
      r.scaling(fr, "delta", "abs_flux");
      r.result("flux_slope", fr.slope);
      detail::check_min(r, "flux_slope", fr.slope, min_flux);
    }
  };
}

// --- decomposition-check ----------------------------------------------------------------

inline Job plan_decomposition_check(Config& c, std::uint64_t seed) {
  const auto flow = detail::read_flow(c, seed, 1e-3, 0.008, 1);
  const double cells = c.get_double("decomposition.delta_cells", 4.0, 2.0, 1e6);
  const bool refine = c.get_bool("decomposition.compare_coarse", true);
  const double delta = cells * flow.solver.grid.spacing();
  if (delta >= std::numbers::pi) throw ConfigError("config: decomposition.delta_cells gives delta >= pi");
  const long snaps = flow.solver.steps() / flow.solver.snapshot_stride;
  if (snaps < (refine ? 4 : 2) || (refine && snaps % 2 != 0))
    throw ConfigError("config: decomposition-check needs an even number (>= 4) of snapshot intervals");
  const auto max_res = detail::opt_double(c, "acceptance.max_relative_residual", 0.0);
  const auto min_order = detail::opt_double(c, "acceptance.min_order");
  if (min_order && !refine) throw ConfigError("config: acceptance.min_order needs decomposition.compare_coarse");
  return [=](Report& r, const std::filesystem::path&) {
    MollifierSpec m;
    m.delta = delta;
    const auto tr = integrate(flow.initial(), flow.solver);
    const std::size_t last = tr.size() - 1;
    const auto fine = pressure_decomposition_check(tr, m, 0, last, 1);
    Table t{"terms", {"term", "c0_norm"}, {}};
    for (std::size_t i = 0; i < 5; ++i) t.rows.push_back({static_cast<double>(i + 1), fine.term_norms[i]});
    r.table(std::move(t));
    r.result("s", fine.s);
    r.result("t", fine.t);
    r.result("delta", delta);
    r.result("increment_norm", fine.increment_norm);
    r.result("relative_residual", fine.relative());
    detail::check_max(r, "relative_residual", fine.relative(), max_res);
    if (refine) {
      const auto coarse = pressure_decomposition_check(tr, m, 0, last, 2);
      const double order = std::log2(coarse.relative() / fine.relative());
      r.result("relative_residual_coarse", coarse.relative());
      r.result("order", order);
      detail::check_min(r, "order", order, min_order);
    }
  };
}

// --- registry ---------------------------------------------------------------------------

inline const std::map<std::string, Planner>& experiments() {
  static const std::map<std::string, Planner> m{
      {"gen-field", plan_gen_field},
      {"mollify-scan", plan_mollify_scan},
      {"fraclap-check", plan_fraclap_check},
      {"commutator-check", plan_commutator_check},
      {"pressure-scan", plan_pressure_scan},
      {"extend-check", plan_extend_check},
      {"simulate", plan_simulate},
      {"energy-scan", plan_energy_scan},
      {"identity-check", plan_identity_check},
      {"decomposition-check", plan_decomposition_check},
  };
  return m;
}

enum ExitCode : int { kOk = 0, kAcceptanceFailed = 1, kConfigError = 2, kRuntimeError = 3 };

struct RunOutcome {
  int code = kOk;
  std::string message;  // empty on success
  std::optional<Report> report;
};

/// Parses, validates and runs one experiment, writing the report into `out`.
/// Configuration problems are found before any computing starts.
inline RunOutcome run_experiment(const std::string& name, Config& c, std::optional<std::uint64_t> seed_override,
                                 const std::filesystem::path& out) {
  RunOutcome o;
  const auto& table = experiments();
  const auto it = table.find(name);
  if (it == table.end()) {
    o.code = kConfigError;
    o.message = "unknown experiment '" + name + "'";
    return o;
  }
  Job job;
  std::uint64_t seed = 0;
  bool plots = true;
  try {
    if (c.has("run.experiment")) {
      const auto declared = c.get_string("run.experiment");
      if (declared != name) throw ConfigError("config: run.experiment = '" + declared + "' but '" + name + "' was requested");
    }
    if (seed_override) c.set("run.seed", std::to_string(*seed_override));
    seed = c.get_u64("run.seed", 1);
    plots = c.get_bool("run.plots", true);
    job = it->second(c, seed);
    c.reject_unused();
  } catch (const Error& e) {
    o.code = kConfigError;
    o.message = e.what();
    return o;
  }
  Report r(name, seed, c.resolved());
  r.set_plots(plots);
  try {
    std::filesystem::create_directories(out);
    job(r, out);
    r.write(out);
  } catch (const std::exception& e) {
    o.code = kRuntimeError;
    o.message = e.what();
    return o;
  }
  o.code = r.passed() ? kOk : kAcceptanceFailed;
  if (!r.passed()) {
    for (const auto& ch : r.checks())
      if (!ch.passed()) o.message += (o.message.empty() ? "" : "; ") + ch.name + " = " + detail::csv_number(ch.value);
    o.message = "acceptance checks failed: " + o.message;
  }
  o.report = std::move(r);
  return o;
}

}  // namespace holderlab::lab
