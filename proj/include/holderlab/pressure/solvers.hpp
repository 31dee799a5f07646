#pragma once

// Zero-mean periodic solutions of -Δp = div div(u⊗u) and -Δq = div div div(v⊗w⊗z).

#include <algorithm>
#include <cmath>
#include <string>

#include "holderlab/error.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/samples.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// max_k |k.u(k)| relative to max_k |k||u(k)|; 0 for the zero field.
inline double relative_divergence(const SpectralField& u) {
  require_rank(u, Rank::vector, "relative_divergence");
  double num = 0.0, den = 0.0;
  const std::size_t sz = u.grid().size();
  const auto c = u.coeffs();
  for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const Complex d = double(kx) * c[idx] + double(ky) * c[sz + idx] + double(kz) * c[2 * sz + idx];
    const double kn = std::sqrt(double(kx) * kx + double(ky) * ky + double(kz) * kz);
    num = std::max(num, std::abs(d));
    den = std::max(den, kn * std::max({std::abs(c[idx]), std::abs(c[sz + idx]), std::abs(c[2 * sz + idx])}));
  });
  return den == 0.0 ? 0.0 : num / den;
}

inline void require_solenoidal(const SpectralField& u, const char* what, double tol = 1e-8) {
  const double d = relative_divergence(u);
  if (d > tol) {
    throw PreconditionError(std::string(what) + ": velocity is not divergence-free (relative divergence " +
                            std::to_string(d) + ")");
  }
}

/// Zero-mean p with -Δp = div div R, i.e. p(k) = -k_i k_j R_ij(k) / |k|^2.
inline SpectralField solve_double_divergence(const SpectralField& r) {
  require_rank(r, Rank::tensor2, "solve_double_divergence");
  return inverse_neg_laplacian(div_div(r));
}

/// Zero-mean pressure with -Δp = div div(u⊗u).
inline SpectralField solve_pressure(const SpectralField& u) {
  require_rank(u, Rank::vector, "solve_pressure");
  require_solenoidal(u, "solve_pressure");
  // streamed over the six independent components of u⊗u
  SpectralField p(u.grid(), Rank::scalar, u.hermitian());
  auto dst = p.coeffs();
  for_each_symmetric_square(u, [&](std::size_t i, std::size_t j, std::span<const Complex> c) {
    const double mult = i == j ? 1.0 : 2.0;
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
      if (nyq) return;
      const double k[3] = {double(kx), double(ky), double(kz)};
      const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      if (k2 == 0.0) return;
      dst[idx] -= mult * k[i] * k[j] / k2 * c[idx];
    });
  });
  return p;
}

/// Zero-mean q with -Δq = div div div(v⊗w⊗z): q(k) = -i k_i k_j k_l (v_i w_j z_l)(k) / |k|^2.
/// The rank-3 product is contracted on the fly.
inline SpectralField solve_q(const SpectralField& v, const SpectralField& w, const SpectralField& z) {
  SpectralField q(v.grid(), Rank::scalar, v.hermitian() && w.hermitian() && z.hermitian());
  auto dst = q.coeffs();
  const GridSpec& g = v.grid();
  for_each_triple_product(v, w, z, [&](std::size_t i, std::size_t j, std::size_t l, std::span<const Complex> c) {
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
      if (nyq) return;
      const double k[3] = {double(kx), double(ky), double(kz)};
      const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      if (k2 == 0.0) return;
      dst[idx] += Complex{0.0, -k[i] * k[j] * k[l] / k2} * c[idx];
    });
  });
  return q;
}

}  // namespace holderlab
