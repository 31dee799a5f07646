#pragma once

// Mollification with the radial bump rho(x) = exp(-1/(1-|x|^2)) / Z on B_1.
//
// Convolution with rho_delta is applied exactly through its Fourier transform,
// rho_hat(delta |k|) = (4 pi / Z) ∫_0^1 rho(r) r^2 sinc(delta |k| r) dr, which is
// evaluated by composite Gauss–Legendre with the same rule that fixes Z, so
// rho_hat(0) = 1 and the mean is preserved to rounding.

#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "holderlab/error.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/quadrature.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

enum class KernelKind { smooth_bump };

struct MollifierSpec {
  double delta = 0.5;
  KernelKind kernel = KernelKind::smooth_bump;
  int quadrature_points_per_axis = 16;
  // Permits delta < 2h; used where the scale is dictated by a time gap.
  bool allow_subgrid = false;
};

/// Unnormalized bump profile exp(-1/(1-r^2)) for r < 1, else 0.
inline double bump_profile(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

/// Radial transform of the unit-mass bump, tabulated lazily per argument.
class BumpTransform {
 public:
  explicit BumpTransform(int points_per_panel = 16) {
    detail::require(points_per_panel >= 4, "MollifierSpec: quadrature_points_per_axis must be >= 4");
    base_ = gauss_legendre(points_per_panel);
    mass_ = integrate(0.0);
  }

  /// Z = ∫_{B_1} exp(-1/(1-|x|^2)) dx under the radial rule.
  double unnormalized_mass() const { return mass_; }

  double operator()(double xi) const { return integrate(xi) / mass_; }

 private:
  double integrate(double xi) const {
    // 16 panels resolve the essential singularity at r = 1; more panels follow the oscillation.
    const int panels = 16 + static_cast<int>(std::ceil(std::abs(xi) / 4.0));
    const double w = 1.0 / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      for (std::size_t i = 0; i < base_.nodes.size(); ++i) {
        const double r = w * (p + 0.5 * (base_.nodes[i] + 1.0));
        const double x = xi * r;
        const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        acc += 0.5 * w * base_.weights[i] * bump_profile(r) * r * r * sinc;
      }
    }
    return 4.0 * std::numbers::pi * acc;
  }

  QuadratureRule base_;
  double mass_;
};

namespace detail {

inline void check_mollifier(const MollifierSpec& m, const GridSpec& g) {
  if (!(m.delta > 0.0) || !(m.delta < std::numbers::pi)) {
    throw PreconditionError("mollify: delta must lie in (0, pi), got " + std::to_string(m.delta));
  }
  if (!m.allow_subgrid && m.delta < 2.0 * g.spacing()) {
    throw UnderResolvedError("mollify: delta=" + std::to_string(m.delta) + " is below 2h=" +
                             std::to_string(2.0 * g.spacing()) + "; mollification is under-resolved");
  }
}

}  // namespace detail

/// f_delta = f * rho_delta (every component).
inline SpectralField mollify(const SpectralField& f, const MollifierSpec& m) {
  detail::check_mollifier(m, f.grid());
  const BumpTransform rho_hat(m.quadrature_points_per_axis);
  const double delta = m.delta;
  return apply_radial_multiplier(f, [&](double k2) { return k2 == 0.0 ? 1.0 : rho_hat(delta * std::sqrt(k2)); });
}

/// R_delta = u_delta ⊗ u_delta - (u ⊗ u)_delta.
inline SpectralField reynolds_stress(const SpectralField& u, const MollifierSpec& m) {
  require_rank(u, Rank::vector, "reynolds_stress");
  const auto ud = mollify(u, m);
  auto r = multiply(ud, ud);
  r -= mollify(multiply(u, u), m);
  return r;
}

}  // namespace holderlab
