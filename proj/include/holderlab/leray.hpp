#pragma once

#include "holderlab/grid.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// Projection onto divergence-free fields: (I - k k^T/|k|^2) u(k) for k != 0.
/// The mean mode is left alone; Nyquist slots are zeroed.
inline SpectralField leray_project(const SpectralField& u) {
  require_rank(u, Rank::vector, "leray_project");
  SpectralField out = u;
  auto c0 = out.component(0);
  auto c1 = out.component(1);
  auto c2 = out.component(2);
  for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) {
      c0[idx] = c1[idx] = c2[idx] = Complex{};
      return;
    }
    const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
    if (k2 == 0.0) return;
    const Complex dot = (double(kx) * c0[idx] + double(ky) * c1[idx] + double(kz) * c2[idx]) / k2;
    c0[idx] -= double(kx) * dot;
    c1[idx] -= double(ky) * dot;
    c2[idx] -= double(kz) * dot;
  });
  return out;
}

}  // namespace holderlab
