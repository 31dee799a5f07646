#pragma once

// Exact spectral differentiation. Every operator zeroes the Nyquist slots and
// sends k = 0 to 0.

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

namespace detail {

inline std::array<double, 3> kvec(int kx, int ky, int kz) { return {double(kx), double(ky), double(kz)}; }

}  // namespace detail

/// Multiplies every component by m(|k|^2); m is evaluated once per distinct |k|^2.
template <class Fn>
SpectralField apply_radial_multiplier(const SpectralField& f, Fn&& m) {
  SpectralField out = f;
  std::map<long, double> cache;
  const std::size_t sz = f.grid().size();
  auto coeffs = out.coeffs();
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    double factor = 0.0;
    if (!nyq) {
      const long k2 = long(kx) * kx + long(ky) * ky + long(kz) * kz;
      auto it = cache.find(k2);
      if (it == cache.end()) it = cache.emplace(k2, m(static_cast<double>(k2))).first;
      factor = it->second;
    }
    for (std::size_t c = 0; c < f.num_components(); ++c) coeffs[c * sz + idx] *= factor;
  });
  return out;
}

/// Gradient: scalar -> vector (∂_i f); vector -> tensor2 with (∇u)_ij = ∂_j u_i.
inline SpectralField grad(const SpectralField& f) {
  detail::require(f.rank() == Rank::scalar || f.rank() == Rank::vector,
                  "grad: expected scalar or vector field, got " + to_string(f.rank()));
  const std::size_t nin = f.num_components();
  SpectralField out(f.grid(), f.rank() == Rank::scalar ? Rank::vector : Rank::tensor2, f.hermitian());
  const std::size_t sz = f.grid().size();
  auto dst = out.coeffs();
  const auto src = f.coeffs();
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const auto k = detail::kvec(kx, ky, kz);
    for (std::size_t c = 0; c < nin; ++c)
      for (std::size_t j = 0; j < 3; ++j) dst[(c * 3 + j) * sz + idx] = Complex{0.0, k[j]} * src[c * sz + idx];
  });
  return out;
}

/// Divergence over the last index: vector -> scalar, tensor2 -> vector, tensor3 -> tensor2.
inline SpectralField divergence(const SpectralField& f) {
  Rank r;
  switch (f.rank()) {
    case Rank::vector: r = Rank::scalar; break;
    case Rank::tensor2: r = Rank::vector; break;
    case Rank::tensor3: r = Rank::tensor2; break;
    default: throw PreconditionError("divergence: scalar field has no divergence");
  }
  SpectralField out(f.grid(), r, f.hermitian());
  const std::size_t nout = components(r);
  const std::size_t sz = f.grid().size();
  auto dst = out.coeffs();
  const auto src = f.coeffs();
  for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const auto k = detail::kvec(kx, ky, kz);
    for (std::size_t c = 0; c < nout; ++c) {
      Complex acc{};
      for (std::size_t j = 0; j < 3; ++j) acc += k[j] * src[(c * 3 + j) * sz + idx];
      dst[c * sz + idx] = Complex{0.0, 1.0} * acc;
    }
  });
  return out;
}

/// sum_ij ∂_i ∂_j T_ij.
inline SpectralField div_div(const SpectralField& t) {
  require_rank(t, Rank::tensor2, "div_div");
  SpectralField out(t.grid(), Rank::scalar, t.hermitian());
  const std::size_t sz = t.grid().size();
  auto dst = out.coeffs();
  const auto src = t.coeffs();
  for_each_mode(t.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const auto k = detail::kvec(kx, ky, kz);
    Complex acc{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) acc += k[i] * k[j] * src[tidx(i, j) * sz + idx];
    dst[idx] = -acc;
  });
  return out;
}

/// sum_ijl ∂_i ∂_j ∂_l T_ijl.
inline SpectralField div_div_div(const SpectralField& t) {
  require_rank(t, Rank::tensor3, "div_div_div");
  SpectralField out(t.grid(), Rank::scalar, t.hermitian());
  const std::size_t sz = t.grid().size();
  auto dst = out.coeffs();
  const auto src = t.coeffs();
  for_each_mode(t.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const auto k = detail::kvec(kx, ky, kz);
    Complex acc{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t l = 0; l < 3; ++l) acc += k[i] * k[j] * k[l] * src[tidx(i, j, l) * sz + idx];
    dst[idx] = Complex{0.0, -1.0} * acc;
  });
  return out;
}

inline SpectralField curl(const SpectralField& u) {
  require_rank(u, Rank::vector, "curl");
  SpectralField out(u.grid(), Rank::vector, u.hermitian());
  const std::size_t sz = u.grid().size();
  auto dst = out.coeffs();
  const auto src = u.coeffs();
  const Complex I{0.0, 1.0};
  for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
    if (nyq) return;
    const auto k = detail::kvec(kx, ky, kz);
    const Complex a = src[idx], b = src[sz + idx], c = src[2 * sz + idx];
    dst[idx] = I * (k[1] * c - k[2] * b);
    dst[sz + idx] = I * (k[2] * a - k[0] * c);
    dst[2 * sz + idx] = I * (k[0] * b - k[1] * a);
  });
  return out;
}

/// Componentwise Laplacian.
inline SpectralField laplacian(const SpectralField& f) {
  return apply_radial_multiplier(f, [](double k2) { return -k2; });
}

/// Zero-mean solution of -Δ g = f (componentwise).
inline SpectralField inverse_neg_laplacian(const SpectralField& f) {
  return apply_radial_multiplier(f, [](double k2) { return k2 == 0.0 ? 0.0 : 1.0 / k2; });
}

/// Fourier-multiplier fractional Laplacian: coefficients scaled by |k|^{2 alpha}.
inline SpectralField frac_laplacian_multiplier(const SpectralField& f, double alpha) {
  return apply_radial_multiplier(f, [alpha](double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, alpha); });
}

/// sum_ij A_ij B_ij integrated over the box, i.e. ∫ A : B dx (Parseval).
inline double contract_integral(const SpectralField& a, const SpectralField& b) {
  return inner_product(a, b);
}

}  // namespace holderlab
