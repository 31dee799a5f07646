#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/grid.hpp"

namespace holderlab {

/// Flat component index of T_ij in a rank-2 tensor field.
constexpr std::size_t tidx(std::size_t i, std::size_t j) { return 3 * i + j; }
/// Flat component index of T_ijl in a rank-3 tensor field.
constexpr std::size_t tidx(std::size_t i, std::size_t j, std::size_t l) { return 9 * i + 3 * j + l; }

/// Fourier coefficients of a scalar, vector or tensor field on the periodic box.
///
/// Coefficients are normalized so that f(x) = sum_k c_k exp(i k.x); component c
/// occupies the contiguous block [c*n^3, (c+1)*n^3) in FFT index order. The
/// hermitian flag marks real-valued fields (c_{-k} = conj(c_k)).
class SpectralField {
 public:
  SpectralField(GridSpec grid, Rank rank, bool hermitian = true)
      : grid_(grid), rank_(rank), hermitian_(hermitian),
        coeffs_(components(rank) * grid.size(), Complex{0.0, 0.0}) {}

  const GridSpec& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }
  std::size_t num_components() const { return components(rank_); }

  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }

  std::span<Complex> component(std::size_t c) {
    return std::span<Complex>(coeffs_).subspan(c * grid_.size(), grid_.size());
  }
  std::span<const Complex> component(std::size_t c) const {
    return std::span<const Complex>(coeffs_).subspan(c * grid_.size(), grid_.size());
  }

  Complex& at(std::size_t c, int kx, int ky, int kz) {
    return coeffs_[c * grid_.size() + grid_.index_of(kx, ky, kz)];
  }
  const Complex& at(std::size_t c, int kx, int ky, int kz) const {
    return coeffs_[c * grid_.size() + grid_.index_of(kx, ky, kz)];
  }

  /// Largest coefficient modulus over all components.
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : coeffs_) m = std::max(m, std::abs(z));
    return m;
  }

  /// Largest |c_{-k} - conj(c_k)| over all modes, ignoring Nyquist slots.
  double hermitian_defect() const {
    double d = 0.0;
    const std::size_t sz = grid_.size();
    for (std::size_t c = 0; c < num_components(); ++c) {
      const Complex* base = coeffs_.data() + c * sz;
      for_each_mode(grid_, [&](std::size_t idx, int kx, int ky, int kz, bool nyq) {
        if (nyq) return;
        const Complex mirror = base[grid_.index_of(-kx, -ky, -kz)];
        d = std::max(d, std::abs(mirror - std::conj(base[idx])));
      });
    }
    return d;
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_compatible(o, "operator+=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_compatible(o, "operator-=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& z : coeffs_) z *= s;
    return *this;
  }
  SpectralField& operator*=(Complex s) {
    for (auto& z : coeffs_) z *= s;
    if (s.imag() != 0.0) hermitian_ = false;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

  void check_compatible(const SpectralField& o, const char* what) const {
    if (!(grid_ == o.grid_) || rank_ != o.rank_) {
      throw PreconditionError(std::string(what) + ": grid or rank mismatch");
    }
  }

 private:
  GridSpec grid_;
  Rank rank_;
  bool hermitian_;
  std::vector<Complex> coeffs_;
};

inline void require_same_grid(const SpectralField& a, const SpectralField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw PreconditionError(std::string(what) + ": grid mismatch");
}

inline void require_rank(const SpectralField& f, Rank r, const char* what) {
  if (f.rank() != r) {
    throw PreconditionError(std::string(what) + ": expected " + to_string(r) + " field, got " +
                            to_string(f.rank()));
  }
}

/// Extracts one component of a field as a scalar field.
inline SpectralField component_field(const SpectralField& f, std::size_t c) {
  SpectralField out(f.grid(), Rank::scalar, f.hermitian());
  std::ranges::copy(f.component(c), out.coeffs().begin());
  return out;
}

/// Assembles a vector field from three scalar fields.
inline SpectralField make_vector(const SpectralField& a, const SpectralField& b,
                                 const SpectralField& c) {
  SpectralField out(a.grid(), Rank::vector, a.hermitian() && b.hermitian() && c.hermitian());
  std::ranges::copy(a.coeffs(), out.component(0).begin());
  std::ranges::copy(b.coeffs(), out.component(1).begin());
  std::ranges::copy(c.coeffs(), out.component(2).begin());
  return out;
}

/// Spatial mean of each component (the k = 0 coefficient).
inline Complex mean(const SpectralField& f, std::size_t c = 0) { return f.component(c)[0]; }

/// Integral over the box of sum_c conj(f_c) g_c, via Parseval.
inline double inner_product(const SpectralField& f, const SpectralField& g) {
  f.check_compatible(g, "inner_product");
  Complex acc{0.0, 0.0};
  const auto a = f.coeffs();
  const auto b = g.coeffs();
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return std::pow(kTwoPi, 3) * acc.real();
}

/// L2 norm over the box.
inline double l2_norm(const SpectralField& f) { return std::sqrt(inner_product(f, f)); }

}  // namespace holderlab
