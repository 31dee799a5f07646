#pragma once

// Pseudo-spectral integrator for
//   ∂_t u + div(u⊗u) + ∇p + ν(-Δ)^α u = 0,  div u = 0
// on the periodic box. The pressure is removed by Leray projection; the
// dissipative part is integrated exactly (integrating-factor RK4).

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/fft.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/leray.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/pressure/solvers.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

enum class Dealias { two_thirds };

struct SolverConfig {
  GridSpec grid{32};
  double dt = 1e-3;
  double nu = 0.0;
  double alpha = 0.25;
  double t_end = 1.0;
  Dealias dealias = Dealias::two_thirds;
  int snapshot_stride = 1;

  long steps() const { return std::lround(t_end / dt); }

  void validate() const {
    detail::require(dt > 0.0 && std::isfinite(dt), "SolverConfig: dt must be positive");
    detail::require(nu >= 0.0 && std::isfinite(nu), "SolverConfig: nu must be >= 0");
    detail::require(alpha > 0.0 && alpha < 0.5, "SolverConfig: alpha must lie in (0, 1/2)");
    detail::require(t_end >= 0.0 && std::isfinite(t_end), "SolverConfig: t_end must be >= 0");
    detail::require(snapshot_stride >= 1, "SolverConfig: snapshot_stride must be >= 1");
    detail::require(std::abs(static_cast<double>(steps()) * dt - t_end) <= 1e-9 * std::max(1.0, t_end),
                    "SolverConfig: t_end must be an integer multiple of dt");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  SolverConfig config;

  std::size_t size() const { return times.size(); }
};

/// Two-thirds rule: a mode is kept iff 3|k_i| < n on every axis.
inline bool dealias_keeps(const GridSpec& g, int kx, int ky, int kz) {
  const int n = g.n();
  return 3 * std::abs(kx) < n && 3 * std::abs(ky) < n && 3 * std::abs(kz) < n;
}

inline SpectralField dealias_truncate(const SpectralField& f) {
  SpectralField out = f;
  const std::size_t sz = f.grid().size();
  auto c = out.coeffs();
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool) {
    if (dealias_keeps(f.grid(), kx, ky, kz)) return;
    for (std::size_t q = 0; q < f.num_components(); ++q) c[q * sz + idx] = Complex{};
  });
  return out;
}

/// Largest coefficient outside the kept set, relative to the largest overall.
inline double dealias_defect(const SpectralField& f) {
  double out = 0.0;
  const std::size_t sz = f.grid().size();
  const auto c = f.coeffs();
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool) {
    if (dealias_keeps(f.grid(), kx, ky, kz)) return;
    for (std::size_t q = 0; q < f.num_components(); ++q) out = std::max(out, std::abs(c[q * sz + idx]));
  });
  const double m = f.max_abs();
  return m == 0.0 ? 0.0 : out / m;
}

/// -P div(u⊗u) with alias-free products (no truncation to the 2/3 set).
inline SpectralField nonlinear_term(const SpectralField& u) {
  require_rank(u, Rank::vector, "nonlinear_term");
  SpectralField n(u.grid(), Rank::vector, u.hermitian());
  const std::size_t sz = u.grid().size();
  auto dst = n.coeffs();
  for_each_symmetric_square(u, [&](std::size_t i, std::size_t j, std::span<const Complex> c) {
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
      if (nyq) return;
      const double k[3] = {double(kx), double(ky), double(kz)};
      // -(∂_j T_ij) e_i - (∂_i T_ij) e_j for the off-diagonal pair
      dst[i * sz + idx] -= Complex{0.0, k[j]} * c[idx];
      if (i != j) dst[j * sz + idx] -= Complex{0.0, k[i]} * c[idx];
    });
  });
  return leray_project(n);
}

namespace detail {

// -P div(u⊗u) on the dealiased state: products on the n-grid, truncated to the
// 2/3 set. The kept modes are tabulated once; everything else stays zero.
class DealiasedNonlinearity {
 public:
  explicit DealiasedNonlinearity(const GridSpec& g)
      : g_(g), work_(fft::half_size(g.n())), samples_(3, std::vector<double>(g.size())), prod_(g.size()) {
    const int n = g.n();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool) {
      if (!dealias_keeps(g, kx, ky, kz)) return;
      Mode m;
      m.idx = idx;
      m.conj = kz < 0;
      m.src = m.conj ? half_index(n, g.slot(-kx), g.slot(-ky), -kz) : half_index(n, g.slot(kx), g.slot(ky), kz);
      m.k = {double(kx), double(ky), double(kz)};
      const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
      m.inv_k2 = k2 == 0.0 ? 0.0 : 1.0 / k2;
      modes_.push_back(m);
    });
    kept_ = std::vector<Complex>(3 * modes_.size());
  }

  void operator()(const SpectralField& u, SpectralField& out) {
    const int n = g_.n();
    const std::size_t sz = g_.size();
    for (std::size_t c = 0; c < 3; ++c) {
      full_to_half(n, u.component(c), work_);
      fft::inverse_real(n, work_.data(), samples_[c].data());
    }
    std::fill(kept_.begin(), kept_.end(), Complex{});
    const std::size_t nm = modes_.size();
    const double scale = 1.0 / static_cast<double>(sz);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) {
        for (std::size_t q = 0; q < sz; ++q) prod_[q] = samples_[i][q] * samples_[j][q];
        fft::forward_real(n, prod_.data(), work_.data());
        for (std::size_t m = 0; m < nm; ++m) {
          const Mode& md = modes_[m];
          const Complex w = work_[md.src];
          const double re = w.real() * scale, im = (md.conj ? -w.imag() : w.imag()) * scale;
          // -i k_j T_ij into component i, -i k_i T_ij into j
          kept_[i * nm + m] += Complex{md.k[j] * im, -md.k[j] * re};
          if (i != j) kept_[j * nm + m] += Complex{md.k[i] * im, -md.k[i] * re};
        }
      }
    auto dst = out.coeffs();
    std::fill(dst.begin(), dst.end(), Complex{});
    for (std::size_t m = 0; m < nm; ++m) {
      const Mode& md = modes_[m];
      Complex a = kept_[m], b = kept_[nm + m], c = kept_[2 * nm + m];
      const Complex dot = (md.k[0] * a + md.k[1] * b + md.k[2] * c) * md.inv_k2;
      dst[md.idx] = a - md.k[0] * dot;
      dst[sz + md.idx] = b - md.k[1] * dot;
      dst[2 * sz + md.idx] = c - md.k[2] * dot;
    }
  }

 private:
  struct Mode {
    std::size_t idx = 0, src = 0;
    bool conj = false;
    std::array<double, 3> k{};
    double inv_k2 = 0.0;
  };
  GridSpec g_;
  std::vector<Complex> work_;
  std::vector<std::vector<double>> samples_;
  std::vector<double> prod_;
  std::vector<Mode> modes_;
  std::vector<Complex> kept_;
};

}  // namespace detail

/// Integrating-factor RK4. Snapshots at t = 0 and every snapshot_stride steps
/// (the final time is always stored).
inline Trajectory integrate(const SpectralField& u0, const SolverConfig& cfg) {
  cfg.validate();
  require_rank(u0, Rank::vector, "integrate");
  detail::require(u0.grid() == cfg.grid, "integrate: initial field and config grid differ");
  detail::require(u0.hermitian(), "integrate: initial field must be real (hermitian)");
  require_solenoidal(u0, "integrate");
  if (dealias_defect(u0) > 1e-12) {
    throw PreconditionError("integrate: initial field is not band-limited under the two-thirds rule (relative "
                            "content " + std::to_string(dealias_defect(u0)) + " outside 3|k_i| < n)");
  }
  const GridSpec& g = cfg.grid;
  const double h = g.spacing();
  auto check_cfl = [&](const SpectralField& u, double t) {
    const double umax = c0_norm(u);
    if (!std::isfinite(umax)) {
      throw NumericalError("integrate: non-finite velocity at t=" + std::to_string(t));
    }
    if (umax > 0.0 && cfg.dt > 0.5 * h / umax) {
      throw NumericalError("integrate: CFL violation at t=" + std::to_string(t) + ": dt=" + std::to_string(cfg.dt) +
                           " exceeds 0.5 h/|u|_C0=" + std::to_string(0.5 * h / umax));
    }
  };
  SpectralField u = dealias_truncate(leray_project(u0));
  check_cfl(u, 0.0);

  // exact dissipation factors for dt/2 and dt
  const std::size_t sz = g.size();
  std::vector<double> eh(sz, 1.0), ef(sz, 1.0);
  if (cfg.nu > 0.0) {
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool) {
      const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
      const double rate = k2 == 0.0 ? 0.0 : cfg.nu * std::pow(k2, cfg.alpha);
      eh[idx] = std::exp(-0.5 * rate * cfg.dt);
      ef[idx] = std::exp(-rate * cfg.dt);
    });
  }

  Trajectory traj;
  traj.config = cfg;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u);
  detail::DealiasedNonlinearity rhs(g);
  SpectralField k1(g, Rank::vector), k2(g, Rank::vector), k3(g, Rank::vector), k4(g, Rank::vector);
  SpectralField stage(g, Rank::vector);
  const double dt = cfg.dt;
  const long steps = cfg.steps();
  const std::size_t total = 3 * sz;
  for (long s = 1; s <= steps; ++s) {
    auto U = u.coeffs();
    auto S = stage.coeffs();
    auto K1 = k1.coeffs(), K2 = k2.coeffs(), K3 = k3.coeffs(), K4 = k4.coeffs();
    rhs(u, k1);
    for (std::size_t q = 0; q < total; ++q) S[q] = (U[q] + (0.5 * dt) * K1[q]) * eh[q % sz];
    rhs(stage, k2);
    for (std::size_t q = 0; q < total; ++q) S[q] = U[q] * eh[q % sz] + (0.5 * dt) * K2[q];
    rhs(stage, k3);
    for (std::size_t q = 0; q < total; ++q) S[q] = (U[q] * ef[q % sz]) + dt * (K3[q] * eh[q % sz]);
    rhs(stage, k4);
    // u_{n+1} = E u + dt/6 (E k1 + 2 E_h (k2 + k3) + k4)
    for (std::size_t q = 0; q < total; ++q) {
      const double e = ef[q % sz], h2 = eh[q % sz];
      U[q] = U[q] * e + (dt / 6.0) * (K1[q] * e + 2.0 * ((K2[q] + K3[q]) * h2) + K4[q]);
    }
    if (s % cfg.snapshot_stride == 0 || s == steps) {
      const double t = static_cast<double>(s) * dt;
      check_cfl(u, t);
      traj.times.push_back(t);
      traj.snapshots.push_back(u);
    }
  }
  return traj;
}

/// Mollified-equation time derivative: ∂_t u_δ = (-P div(u⊗u) - ν(-Δ)^α u)_δ,
/// using alias-free products.
inline SpectralField velocity_tendency(const SpectralField& u, double nu, double alpha) {
  SpectralField t = nonlinear_term(u);
  if (nu > 0.0) t -= nu * apply_radial_multiplier(u, [alpha](double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, alpha); });
  return t;
}

}  // namespace holderlab
