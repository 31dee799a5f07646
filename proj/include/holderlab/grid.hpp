#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "holderlab/error.hpp"

namespace holderlab {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tensor rank of a field; the value is the number of stored components.
enum class Rank : int { scalar = 1, vector = 3, tensor2 = 9, tensor3 = 27 };

constexpr std::size_t components(Rank r) { return static_cast<std::size_t>(r); }

inline std::string to_string(Rank r) {
  switch (r) {
    case Rank::scalar: return "scalar";
    case Rank::vector: return "vector";
    case Rank::tensor2: return "tensor2";
    case Rank::tensor3: return "tensor3";
  }
  return "unknown";
}

/// Integer code used by the HLD1 snapshot header.
constexpr int rank_code(Rank r) {
  switch (r) {
    case Rank::scalar: return 0;
    case Rank::vector: return 1;
    case Rank::tensor2: return 2;
    case Rank::tensor3: return 3;
  }
  return -1;
}

inline Rank rank_from_code(long code) {
  switch (code) {
    case 0: return Rank::scalar;
    case 1: return Rank::vector;
    case 2: return Rank::tensor2;
    case 3: return Rank::tensor3;
    default: throw PreconditionError("unknown rank code " + std::to_string(code));
  }
}

/// Uniform grid on the periodic box [0, 2pi)^3 with n samples per axis.
class GridSpec {
 public:
  explicit GridSpec(int n) : n_(n) {
    detail::require(n >= 8 && n % 2 == 0,
                    "GridSpec: n_per_axis must be even and >= 8, got " + std::to_string(n));
  }

  int n() const { return n_; }
  double domain_length() const { return kTwoPi; }
  double spacing() const { return kTwoPi / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  int nyquist() const { return n_ / 2; }

  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + l;
  }

  /// Signed wavenumber stored at FFT index idx; the Nyquist index maps to +n/2.
  int wavenumber(int idx) const { return idx <= n_ / 2 ? idx : idx - n_; }

  /// FFT index holding wavenumber k (taken modulo n).
  int slot(int k) const { return ((k % n_) + n_) % n_; }

  std::size_t index_of(int kx, int ky, int kz) const { return index(slot(kx), slot(ky), slot(kz)); }

  bool is_nyquist(int idx) const { return idx == n_ / 2; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int n_;
};

/// Calls fn(flat_index, kx, ky, kz, nyquist) for every stored wavevector.
template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const int n = g.n();
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const int kx = g.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      const int ky = g.wavenumber(j);
      const bool ny_ij = g.is_nyquist(i) || g.is_nyquist(j);
      for (int l = 0; l < n; ++l, ++idx) {
        fn(idx, kx, ky, g.wavenumber(l), ny_ij || g.is_nyquist(l));
      }
    }
  }
}

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace holderlab
