#pragma once

#include "holderlab/operators/differential.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

struct CommutatorRequest {
  const SpectralField& f;
  const SpectralField& g;
  double alpha;
};

/// T^alpha(f,g) = (-Δ)^α(f⊗g) - (-Δ)^α f ⊗ g - f ⊗ (-Δ)^α g, products alias-free.
inline SpectralField commutator_T(const CommutatorRequest& req) {
  detail::require(req.alpha > 0.0 && req.alpha < 0.5, "commutator_T: alpha must lie in (0, 1/2)");
  require_same_grid(req.f, req.g, "commutator_T");
  auto t = frac_laplacian_multiplier(multiply(req.f, req.g), req.alpha);
  t -= multiply(frac_laplacian_multiplier(req.f, req.alpha), req.g);
  t -= multiply(req.f, frac_laplacian_multiplier(req.g, req.alpha));
  return t;
}

inline SpectralField commutator_T(const SpectralField& f, const SpectralField& g, double alpha) {
  return commutator_T({f, g, alpha});
}

}  // namespace holderlab
