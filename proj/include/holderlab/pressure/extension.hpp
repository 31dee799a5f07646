#pragma once

// Divergence-free extension of a periodic field to a compactly supported field
// on R^3: u = curl A on the torus, ũ = curl(φA) = φu + ∇φ × A.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/norms/holder.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/operators/frac_laplacian.hpp"
#include "holderlab/pressure/solvers.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

inline constexpr double kExtensionInner = 6.0;
inline constexpr double kExtensionOuter = 12.0;

/// Radial cutoff: 1 on B_6, 0 outside B_12, C^∞ step in between.
struct Cutoff {
  double value = 1.0;
  double dr = 0.0;  // dφ/dr
};

inline Cutoff extension_cutoff(double r) {
  const double w = kExtensionOuter - kExtensionInner;
  const double t = (r - kExtensionInner) / w;
  if (t <= 0.0) return {1.0, 0.0};
  if (t >= 1.0) return {0.0, 0.0};
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  const double s = a / (a + b);
  const double ds = a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / ((a + b) * (a + b));
  return {1.0 - s, -ds / w};
}

namespace detail {

inline void require_extendable(const SpectralField& u, const char* what) {
  require_rank(u, Rank::vector, what);
  require_solenoidal(u, what);
  const double scale = std::max(u.max_abs(), 1e-300);
  for (std::size_t c = 0; c < 3; ++c) {
    if (std::abs(mean(u, c)) > 1e-12 * scale) {
      throw PreconditionError(std::string(what) + ": input must have zero mean (component " + std::to_string(c) +
                              " has mean " + std::to_string(std::abs(mean(u, c))) + ")");
    }
  }
}

}  // namespace detail

/// Vector potential A with curl A = u, div A = 0: A(k) = (curl u)(k) / |k|^2.
inline SpectralField vector_potential(const SpectralField& u) { return inverse_neg_laplacian(curl(u)); }

/// ũ sampled at lattice points x = (i - I) h, i = 0..2I, covering B_12.
struct ExtensionResult {
  int half_width = 0;  // I
  double spacing = 0.0;
  std::vector<double> extended_field;  // 3 components, component-major
  std::vector<double> cutoff;
  std::vector<double> divergence;   // product-rule divergence of ũ with spectral derivatives
  double divergence_scale = 0.0;    // max |∇u| on the torus, for relative checks

  int dim() const { return 2 * half_width + 1; }
  std::size_t size() const { return static_cast<std::size_t>(dim()) * dim() * dim(); }
  std::size_t index(int i, int j, int l) const { return (static_cast<std::size_t>(i) * dim() + j) * dim() + l; }
  Vec3 position(int i, int j, int l) const {
    return {(i - half_width) * spacing, (j - half_width) * spacing, (l - half_width) * spacing};
  }
  Vec3 value(std::size_t q) const {
    return {extended_field[q], extended_field[size() + q], extended_field[2 * size() + q]};
  }
  double max_abs_divergence() const {
    double m = 0.0;
    for (double d : divergence) m = std::max(m, std::abs(d));
    return m;
  }
  double relative_divergence() const {
    return divergence_scale == 0.0 ? 0.0 : max_abs_divergence() / divergence_scale;
  }
  /// Bounded (non-periodic) view for seminorm estimation.
  SampledView view() const { return {{dim(), dim(), dim()}, spacing, 3, extended_field, false}; }
};

/// Samples ũ = φu + ∇φ × A on the lattice of u's grid extended to [-12-h, 12+h]^3.
inline ExtensionResult extend_divfree(const SpectralField& u) {
  detail::require_extendable(u, "extend_divfree");
  const GridSpec& g = u.grid();
  const int n = g.n();
  const SpectralField a = vector_potential(u);
  const auto us = to_samples(u);
  const auto as = to_samples(a);
  const auto gas = to_samples(grad(a));
  const auto gus = to_samples(grad(u));

  ExtensionResult res;
  res.spacing = g.spacing();
  res.half_width = static_cast<int>(std::ceil(kExtensionOuter / res.spacing)) + 1;
  const std::size_t sz = res.size();
  res.extended_field.assign(3 * sz, 0.0);
  res.cutoff.assign(sz, 0.0);
  res.divergence.assign(sz, 0.0);
  for (std::size_t q = 0; q < g.size(); ++q) {
    double s = 0.0;
    for (std::size_t c = 0; c < 9; ++c) s += gus.values[c * g.size() + q] * gus.values[c * g.size() + q];
    res.divergence_scale = std::max(res.divergence_scale, std::sqrt(s));
  }

  const int dim = res.dim();
  const std::size_t gsz = g.size();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int l = 0; l < dim; ++l) {
        const Vec3 x = res.position(i, j, l);
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const std::size_t q = res.index(i, j, l);
        if (r >= kExtensionOuter) continue;
        const Cutoff phi = extension_cutoff(r);
        res.cutoff[q] = phi.value;
        const std::size_t p = g.index(((i - res.half_width) % n + n) % n, ((j - res.half_width) % n + n) % n,
                                      ((l - res.half_width) % n + n) % n);
        Vec3 uv, av, dphi{0.0, 0.0, 0.0};
        for (int c = 0; c < 3; ++c) {
          uv[c] = us.values[c * gsz + p];
          av[c] = as.values[c * gsz + p];
          if (r > 0.0) dphi[c] = phi.dr * x[c] / r;
        }
        const Vec3 cross{dphi[1] * av[2] - dphi[2] * av[1], dphi[2] * av[0] - dphi[0] * av[2],
                         dphi[0] * av[1] - dphi[1] * av[0]};
        for (int c = 0; c < 3; ++c) res.extended_field[c * sz + q] = phi.value * uv[c] + cross[c];
        // div ũ = ∇φ·u + φ div u - ∇φ·curl A
        auto ga = [&](int c, int d) { return gas.values[tidx(c, d) * gsz + p]; };  // ∂_d A_c
        auto gu = [&](int c, int d) { return gus.values[tidx(c, d) * gsz + p]; };
        const Vec3 curl_a{ga(2, 1) - ga(1, 2), ga(0, 2) - ga(2, 0), ga(1, 0) - ga(0, 1)};
        double div = phi.value * (gu(0, 0) + gu(1, 1) + gu(2, 2));
        for (int c = 0; c < 3; ++c) div += dphi[c] * (uv[c] - curl_a[c]);
        res.divergence[q] = div;
      }
  return res;
}

/// Pointwise evaluation of ũ (and of u, A) at arbitrary points by direct
/// summation over the nonzero modes; intended for sparse spectra.
class ExtensionEvaluator {
 public:
  explicit ExtensionEvaluator(const SpectralField& u) {
    detail::require_extendable(u, "ExtensionEvaluator");
    const SpectralField a = vector_potential(u);
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
      if (nyq) return;
      Mode m{{double(kx), double(ky), double(kz)}, {}, {}};
      bool any = false;
      for (std::size_t c = 0; c < 3; ++c) {
        m.u[c] = u.component(c)[idx];
        m.a[c] = a.component(c)[idx];
        any = any || m.u[c] != Complex{} || m.a[c] != Complex{};
      }
      if (any) modes_.push_back(m);
    });
  }

  std::size_t num_modes() const { return modes_.size(); }

  /// Periodic u and A at x.
  void periodic(const Vec3& x, Vec3& u, Vec3& a) const {
    u = {0.0, 0.0, 0.0};
    a = {0.0, 0.0, 0.0};
    for (const auto& m : modes_) {
      const Complex e = std::polar(1.0, m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]);
      for (int c = 0; c < 3; ++c) {
        u[c] += (m.u[c] * e).real();
        a[c] += (m.a[c] * e).real();
      }
    }
  }

  Vec3 operator()(const Vec3& x) const {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r >= kExtensionOuter) return {0.0, 0.0, 0.0};
    Vec3 u, a;
    periodic(x, u, a);
    const Cutoff phi = extension_cutoff(r);
    Vec3 d{0.0, 0.0, 0.0};
    if (r > 0.0)
      for (int c = 0; c < 3; ++c) d[c] = phi.dr * x[c] / r;
    return {phi.value * u[0] + d[1] * a[2] - d[2] * a[1], phi.value * u[1] + d[2] * a[0] - d[0] * a[2],
            phi.value * u[2] + d[0] * a[1] - d[1] * a[0]};
  }

 private:
  struct Mode {
    Vec3 k;
    std::array<Complex, 3> u, a;
  };
  std::vector<Mode> modes_;
};

}  // namespace holderlab
