#pragma once

// Conversions between Fourier coefficients and grid samples, exact spectral
// shifts, and alias-free pointwise products on zero-padded grids.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/fft.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

/// Real grid samples, component-major; sample (i,j,l) sits at x = h*(i,j,l).
struct GridSamples {
  GridSpec grid;
  Rank rank = Rank::scalar;
  std::vector<double> values;

  GridSamples(GridSpec g, Rank r) : grid(g), rank(r), values(components(r) * g.size(), 0.0) {}

  std::size_t num_components() const { return components(rank); }
  std::span<double> component(std::size_t c) {
    return std::span<double>(values).subspan(c * grid.size(), grid.size());
  }
  std::span<const double> component(std::size_t c) const {
    return std::span<const double>(values).subspan(c * grid.size(), grid.size());
  }
  double& at(std::size_t c, int i, int j, int l) { return values[c * grid.size() + grid.index(i, j, l)]; }
  double at(std::size_t c, int i, int j, int l) const {
    return values[c * grid.size() + grid.index(i, j, l)];
  }
};

namespace detail {

inline std::size_t half_index(int m, int i, int j, int l) {
  return (static_cast<std::size_t>(i) * m + j) * (m / 2 + 1) + l;
}

// Copies the l <= n/2 half of a full coefficient cube into r2c layout.
inline void full_to_half(int n, std::span<const Complex> full, std::vector<Complex>& half) {
  half.assign(fft::half_size(n), Complex{});
  const int nh = n / 2 + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t src = (static_cast<std::size_t>(i) * n + j) * n;
      std::copy_n(full.begin() + static_cast<std::ptrdiff_t>(src), nh,
                  half.begin() + static_cast<std::ptrdiff_t>(half_index(n, i, j, 0)));
    }
}

// Expands an r2c half spectrum into the full cube using c_{-k} = conj(c_k).
inline void half_to_full(int n, const std::vector<Complex>& half, double scale, std::span<Complex> full) {
  for (int i = 0; i < n; ++i) {
    const int mi = (n - i) % n;
    for (int j = 0; j < n; ++j) {
      const int mj = (n - j) % n;
      Complex* row = full.data() + (static_cast<std::size_t>(i) * n + j) * n;
      for (int l = 0; l <= n / 2; ++l) row[l] = half[half_index(n, i, j, l)] * scale;
      for (int l = n / 2 + 1; l < n; ++l) row[l] = std::conj(half[half_index(n, mi, mj, n - l)]) * scale;
    }
  }
}

inline void require_hermitian(const SpectralField& f, const char* what) {
  if (!f.hermitian()) throw PreconditionError(std::string(what) + ": field is not hermitian");
  const double scale = std::max(f.max_abs(), 1e-300);
  // the absolute floor admits round-off-level fields (e.g. residuals of exact identities)
  if (f.hermitian_defect() > 1e-10 * scale + 1e-14) {
    throw PreconditionError(std::string(what) + ": coefficients violate hermitian symmetry");
  }
}

}  // namespace detail

/// Real samples of a hermitian field on its grid.
inline GridSamples to_samples(const SpectralField& f) {
  detail::require_hermitian(f, "to_samples");
  const int n = f.grid().n();
  GridSamples out(f.grid(), f.rank());
  std::vector<Complex> half;
  for (std::size_t c = 0; c < f.num_components(); ++c) {
    detail::full_to_half(n, f.component(c), half);
    fft::inverse_real(n, half.data(), out.component(c).data());
  }
  return out;
}

/// Discrete Fourier coefficients of real samples.
inline SpectralField from_samples(std::span<const double> values, const GridSpec& grid,
                                  Rank rank = Rank::scalar) {
  if (values.size() != components(rank) * grid.size()) {
    throw PreconditionError("from_samples: array of " + std::to_string(values.size()) +
                            " values does not match a " + to_string(rank) + " field on n=" +
                            std::to_string(grid.n()));
  }
  const int n = grid.n();
  SpectralField out(grid, rank, true);
  std::vector<double> work(grid.size());
  std::vector<Complex> half(fft::half_size(n));
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t c = 0; c < components(rank); ++c) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(c * grid.size()), grid.size(), work.begin());
    fft::forward_real(n, work.data(), half.data());
    detail::half_to_full(n, half, scale, out.component(c));
  }
  return out;
}

inline SpectralField from_samples(const GridSamples& g) { return from_samples(g.values, g.grid, g.rank); }

/// Complex samples of any field (no symmetry assumed), component-major.
inline std::vector<Complex> to_complex_samples(const SpectralField& f) {
  const int n = f.grid().n();
  std::vector<Complex> out(f.coeffs().size());
  std::vector<Complex> in(f.grid().size());
  for (std::size_t c = 0; c < f.num_components(); ++c) {
    std::ranges::copy(f.component(c), in.begin());
    fft::inverse_complex(n, in.data(), out.data() + c * f.grid().size());
  }
  return out;
}

inline SpectralField from_complex_samples(std::span<const Complex> values, const GridSpec& grid,
                                          Rank rank = Rank::scalar) {
  detail::require(values.size() == components(rank) * grid.size(),
                  "from_complex_samples: array shape does not match grid");
  const int n = grid.n();
  SpectralField out(grid, rank, false);
  std::vector<Complex> in(grid.size());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t c = 0; c < components(rank); ++c) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(c * grid.size()), grid.size(), in.begin());
    auto dst = out.component(c);
    fft::forward_complex(n, in.data(), dst.data());
    for (auto& z : dst) z *= scale;
  }
  return out;
}

/// f(. + y), exact for the trigonometric interpolant.
///
/// Nyquist slots hold cos((n/2)x) on each such axis, so they pick up the real
/// factor cos((n/2)y) instead of a phase; this keeps the result hermitian.
inline SpectralField shift_samples(const SpectralField& f, const Vec3& y) {
  detail::require_hermitian(f, "shift_samples");
  const GridSpec& g = f.grid();
  const int n = g.n();
  auto axis_factor = [&](int idx) -> std::vector<Complex> {
    std::vector<Complex> out(n);
    for (int i = 0; i < n; ++i) {
      const int k = g.wavenumber(i);
      out[i] = g.is_nyquist(i) ? Complex{std::cos(k * y[idx]), 0.0}
                               : std::polar(1.0, k * y[idx]);
    }
    return out;
  };
  const auto fx = axis_factor(0), fy = axis_factor(1), fz = axis_factor(2);
  SpectralField out = f;
  for (std::size_t c = 0; c < f.num_components(); ++c) {
    auto dst = out.component(c);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Complex fij = fx[i] * fy[j];
        for (int l = 0; l < n; ++l, ++idx) dst[idx] *= fij * fz[l];
      }
  }
  return out;
}

/// Writes samples as CSV rows "i,j,l,v0[,v1,...]", keeping every stride-th point per axis.
inline void write_csv(std::ostream& os, const GridSamples& s, int stride = 1) {
  detail::require(stride >= 1, "write_csv: stride must be positive");
  const int n = s.grid.n();
  os << "i,j,l";
  for (std::size_t c = 0; c < s.num_components(); ++c) os << ",v" << c;
  os << '\n' << std::setprecision(17);
  for (int i = 0; i < n; i += stride)
    for (int j = 0; j < n; j += stride)
      for (int l = 0; l < n; l += stride) {
        os << i << ',' << j << ',' << l;
        for (std::size_t c = 0; c < s.num_components(); ++c) os << ',' << s.at(c, i, j, l);
        os << '\n';
      }
}

namespace detail {

/// Zero-pads components of fields on an n-grid to an m-grid (m even), and
/// truncates padded products back to |k_i| < n/2. T = double for hermitian
/// fields (r2c/c2r), Complex otherwise.
template <class T>
class Padder {
 public:
  Padder(const GridSpec& g, int m) : g_(g), m_(m + (m % 2)) {}

  int m() const { return m_; }
  std::size_t padded_size() const { return static_cast<std::size_t>(m_) * m_ * m_; }

  std::vector<T> pad(std::span<const Complex> comp) const {
    const int n = g_.n();
    std::vector<T> out(padded_size());
    if constexpr (std::is_same_v<T, double>) {
      std::vector<Complex> half(fft::half_size(m_), Complex{});
      for (int i = 0; i < n; ++i) {
        if (g_.is_nyquist(i)) continue;
        const int pi = slot(g_.wavenumber(i));
        for (int j = 0; j < n; ++j) {
          if (g_.is_nyquist(j)) continue;
          const int pj = slot(g_.wavenumber(j));
          for (int l = 0; l < n / 2; ++l) half[half_index(m_, pi, pj, l)] = comp[g_.index(i, j, l)];
        }
      }
      fft::inverse_real(m_, half.data(), out.data());
    } else {
      std::vector<Complex> full(padded_size(), Complex{});
      for_each_mode(g_, [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
        if (!nyq) full[(static_cast<std::size_t>(slot(kx)) * m_ + slot(ky)) * m_ + slot(kz)] = comp[idx];
      });
      fft::inverse_complex(m_, full.data(), out.data());
    }
    return out;
  }

  /// Spectral truncation of padded samples; `prod` is used as scratch.
  void truncate(std::vector<T>& prod, std::span<Complex> dst) const {
    const double scale = 1.0 / static_cast<double>(padded_size());
    if constexpr (std::is_same_v<T, double>) {
      std::vector<Complex> half(fft::half_size(m_));
      fft::forward_real(m_, prod.data(), half.data());
      for_each_mode(g_, [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
        if (nyq) {
          dst[idx] = Complex{};
        } else if (kz >= 0) {
          dst[idx] = half[half_index(m_, slot(kx), slot(ky), kz)] * scale;
        } else {
          dst[idx] = std::conj(half[half_index(m_, slot(-kx), slot(-ky), -kz)]) * scale;
        }
      });
    } else {
      std::vector<Complex> full(padded_size());
      fft::forward_complex(m_, prod.data(), full.data());
      for_each_mode(g_, [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
        dst[idx] = nyq ? Complex{}
                       : full[(static_cast<std::size_t>(slot(kx)) * m_ + slot(ky)) * m_ + slot(kz)] * scale;
      });
    }
  }

 private:
  int slot(int k) const { return ((k % m_) + m_) % m_; }

  GridSpec g_;
  int m_;
};

inline Rank product_rank(Rank a, Rank b) {
  const std::size_t c = components(a) * components(b);
  switch (c) {
    case 1: return Rank::scalar;
    case 3: return Rank::vector;
    case 9: return Rank::tensor2;
    case 27: return Rank::tensor3;
    default:
      throw PreconditionError("multiply: product of " + to_string(a) + " and " + to_string(b) +
                              " exceeds rank 3");
  }
}

template <class T>
SpectralField multiply_impl(const SpectralField& a, const SpectralField& b) {
  const Rank rank = product_rank(a.rank(), b.rank());
  const bool same = &a == &b;
  Padder<T> pad(a.grid(), (3 * a.grid().n() + 1) / 2);
  std::vector<std::vector<T>> pa, pb;
  for (std::size_t c = 0; c < a.num_components(); ++c) pa.push_back(pad.pad(a.component(c)));
  if (!same)
    for (std::size_t c = 0; c < b.num_components(); ++c) pb.push_back(pad.pad(b.component(c)));
  const auto& rb = same ? pa : pb;
  SpectralField out(a.grid(), rank, a.hermitian() && b.hermitian());
  std::vector<T> prod(pad.padded_size());
  const std::size_t nb = b.num_components();
  for (std::size_t ca = 0; ca < a.num_components(); ++ca)
    for (std::size_t cb = 0; cb < nb; ++cb) {
      if (same && cb < ca) {
        std::ranges::copy(out.component(cb * nb + ca), out.component(ca * nb + cb).begin());
        continue;
      }
      for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = pa[ca][q] * rb[cb][q];
      pad.truncate(prod, out.component(ca * nb + cb));
    }
  return out;
}

}  // namespace detail

/// Alias-free pointwise (outer) product a ⊗ b; component (ca, cb) -> ca*nb + cb.
///
/// Inputs are zero-padded to 3n/2 points per axis, multiplied in sample space,
/// and truncated back to |k_i| < n/2 (Nyquist zeroed). Scalars act componentwise.
inline SpectralField multiply(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "multiply");
  if (a.hermitian() && b.hermitian()) return detail::multiply_impl<double>(a, b);
  return detail::multiply_impl<Complex>(a, b);
}

/// Calls fn(i, j, l, coeffs) with the alias-free coefficients of v_i w_j z_l for
/// every index triple, without materializing the rank-3 tensor.
template <class Fn>
void for_each_triple_product(const SpectralField& v, const SpectralField& w, const SpectralField& z, Fn&& fn) {
  require_same_grid(v, w, "triple product");
  require_same_grid(v, z, "triple product");
  require_rank(v, Rank::vector, "triple product");
  require_rank(w, Rank::vector, "triple product");
  require_rank(z, Rank::vector, "triple product");
  auto run = [&]<class T>(T) {
    detail::Padder<T> pad(v.grid(), 2 * v.grid().n());
    // aliased arguments share their padded samples
    std::vector<std::vector<T>> pv, pw, pz;
    for (std::size_t c = 0; c < 3; ++c) pv.push_back(pad.pad(v.component(c)));
    if (&w != &v)
      for (std::size_t c = 0; c < 3; ++c) pw.push_back(pad.pad(w.component(c)));
    const auto& rw = &w == &v ? pv : pw;
    if (&z != &v && &z != &w)
      for (std::size_t c = 0; c < 3; ++c) pz.push_back(pad.pad(z.component(c)));
    const auto& rz = &z == &v ? pv : (&z == &w ? rw : pz);
    std::vector<T> prod(pad.padded_size());
    std::vector<Complex> coeffs(v.grid().size());
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t l = 0; l < 3; ++l) {
          for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = pv[i][q] * rw[j][q] * rz[l][q];
          pad.truncate(prod, coeffs);
          fn(i, j, l, std::span<const Complex>(coeffs));
        }
  };
  if (v.hermitian() && w.hermitian() && z.hermitian()) {
    run(0.0);
  } else {
    run(Complex{});
  }
}

/// Calls fn(i, j, coeffs) with the alias-free coefficients of u_i u_j for i <= j
/// (the symmetric square of a vector field), one component at a time.
template <class Fn>
void for_each_symmetric_square(const SpectralField& u, Fn&& fn) {
  require_rank(u, Rank::vector, "symmetric square");
  auto run = [&]<class T>(T) {
    detail::Padder<T> pad(u.grid(), (3 * u.grid().n() + 1) / 2);
    std::vector<std::vector<T>> pu;
    for (std::size_t c = 0; c < 3; ++c) pu.push_back(pad.pad(u.component(c)));
    std::vector<T> prod(pad.padded_size());
    std::vector<Complex> coeffs(u.grid().size());
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) {
        for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = pu[i][q] * pu[j][q];
        pad.truncate(prod, coeffs);
        fn(i, j, std::span<const Complex>(coeffs));
      }
  };
  if (u.hermitian()) {
    run(0.0);
  } else {
    run(Complex{});
  }
}

/// Materialized v ⊗ w ⊗ z (rank 3); memory is 27 n^3 coefficients.
inline SpectralField triple_product(const SpectralField& v, const SpectralField& w, const SpectralField& z) {
  SpectralField out(v.grid(), Rank::tensor3, v.hermitian() && w.hermitian() && z.hermitian());
  for_each_triple_product(v, w, z, [&](std::size_t i, std::size_t j, std::size_t l, std::span<const Complex> c) {
    std::ranges::copy(c, out.component(tidx(i, j, l)).begin());
  });
  return out;
}

/// Value of component c at an arbitrary point by direct summation over nonzero modes.
inline double evaluate_at(const SpectralField& f, std::size_t c, const Vec3& x) {
  const GridSpec& g = f.grid();
  Complex acc{};
  const auto comp = f.component(c);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool) {
    if (comp[idx] != Complex{}) acc += comp[idx] * std::polar(1.0, kx * x[0] + ky * x[1] + kz * x[2]);
  });
  return acc.real();
}

}  // namespace holderlab
