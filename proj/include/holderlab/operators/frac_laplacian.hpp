#pragma once

// Two realizations of the fractional Laplacian (-Δ)^α on the torus:
//
//  * fourier_multiplier: coefficients scaled by |k|^{2α};
//  * singular_integral: C_α ∫ (f(x) - f(x+z)) |z|^{-3-2α} dz over the periodic
//    cell centred at x plus `image_shells` layers of periodic images, i.e. over
//    the cube |z|_∞ <= (2S+1)π, with the remaining far field added analytically.
//
// The real-space integral is split with a smooth radial cutoff χ (χ = 1 on
// |z| <= 1, χ = 0 beyond |z| = 3). The near part uses Gauss–Jacobi nodes for
// the r^{1-2α} behaviour of the symmetrized increment; the far part folds all
// images into the centred cell, W_S(w) = Σ_{|m|_∞<=S} K(w + 2πm), and uses
// tensor Gauss–Legendre nodes there. C_α is calibrated so that the k = (1,0,0)
// mode matches the multiplier.
//
// Because every node set is centred on x, applying the rule to a trigonometric
// polynomial factorizes over modes: the rule maps exp(ik.x) to λ_S(k) exp(ik.x).
// apply() uses that factorization; apply_at() runs the same rule pointwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/operators/differential.hpp"
#include "holderlab/quadrature.hpp"
#include "holderlab/spectral_field.hpp"

namespace holderlab {

enum class FracRealization { fourier_multiplier, singular_integral };

struct FracLaplacianSpec {
  double alpha = 0.25;
  FracRealization realization = FracRealization::fourier_multiplier;
  int image_shells = 3;
};

namespace detail {

// C^∞ step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

inline void check_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw PreconditionError(std::string(what) + ": alpha must lie in (0, 1/2), got " + std::to_string(alpha));
  }
}

}  // namespace detail

class SingularIntegralLaplacian {
 public:
  static constexpr double kInner = 1.0;  // χ = 1 below
  static constexpr double kOuter = 3.0;  // χ = 0 above (< π keeps the ball inside the cell)

  SingularIntegralLaplacian(double alpha, int image_shells, int cell_panels = 4, int points = 16)
      : alpha_(alpha), shells_(image_shells) {
    detail::check_alpha(alpha, "frac_laplacian");
    if (image_shells < 1) {
      throw PreconditionError("frac_laplacian: singular_integral needs image_shells >= 1, got " +
                              std::to_string(image_shells));
    }
    build_radial_rules(points);
    build_cell(cell_panels, points);
    tail_ = cube_tail();
    constant_ = 1.0 / raw_symbol(1, 0, 0);
  }

  double alpha() const { return alpha_; }
  int image_shells() const { return shells_; }
  double constant() const { return constant_; }

  /// ∫ over the truncated image cube of (1 - cos k.z)|z|^{-3-2α}, plus the analytic far field.
  double raw_symbol(int kx, int ky, int kz) const {
    std::array<int, 3> k{std::abs(kx), std::abs(ky), std::abs(kz)};
    std::ranges::sort(k);
    if (k[2] == 0) return 0.0;
    const auto key = std::make_tuple(k[0], k[1], k[2]);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double kn = std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
    const double v = near_part(kn) + far_part(k) + tail_;
    cache_.emplace(key, v);
    return v;
  }

  /// Quadrature symbol of the calibrated operator.
  double symbol(int kx, int ky, int kz) const { return constant_ * raw_symbol(kx, ky, kz); }

  SpectralField apply(const SpectralField& f) const {
    const GridSpec& g = f.grid();
    const int limit = g.n() / 4;
    SpectralField out = f;
    const std::size_t sz = g.size();
    auto coeffs = out.coeffs();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, bool) {
      bool any = false;
      for (std::size_t c = 0; c < f.num_components(); ++c) any = any || coeffs[c * sz + idx] != Complex{};
      if (!any) return;
      if (std::abs(kx) > limit || std::abs(ky) > limit || std::abs(kz) > limit) {
        throw PreconditionError("frac_laplacian: singular_integral needs a field band-limited to |k_i| <= n/4");
      }
      const double s = symbol(kx, ky, kz);
      for (std::size_t c = 0; c < f.num_components(); ++c) coeffs[c * sz + idx] *= s;
    });
    return out;
  }

  /// Pointwise evaluation of the same rule at x for component c (direct off-grid sums).
  double apply_at(const SpectralField& f, std::size_t c, const Vec3& x) const {
    struct Mode {
      double kx, ky, kz;
      Complex a;
    };
    std::vector<Mode> modes;
    Complex mean{};
    const auto comp = f.component(c);
    for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz, bool) {
      if (comp[idx] == Complex{}) return;
      if (kx == 0 && ky == 0 && kz == 0) mean = comp[idx];
      modes.push_back({double(kx), double(ky), double(kz), comp[idx]});
    });
    auto eval = [&](double y0, double y1, double y2) {
      Complex acc{};
      for (const auto& m : modes) acc += m.a * std::polar(1.0, m.kx * y0 + m.ky * y1 + m.kz * y2);
      return acc.real();
    };
    const double fx = eval(x[0], x[1], x[2]);
    // near ball: symmetrized increment over a spherical product rule
    double near = 0.0;
    for (std::size_t ir = 0; ir < near_r_.size(); ++ir) {
      const double r = near_r_[ir];
      double ang = 0.0;
      for (std::size_t ia = 0; ia < sphere_.size(); ++ia) {
        const auto& [w0, w1, w2, wt] = sphere_[ia];
        const double inc = 2.0 * fx - eval(x[0] + r * w0, x[1] + r * w1, x[2] + r * w2) -
                           eval(x[0] - r * w0, x[1] - r * w1, x[2] - r * w2);
        ang += wt * 0.5 * inc / (r * r);
      }
      near += near_w_[ir] * ang;
    }
    double far = 0.0;
    const std::size_t m = cell_nodes_.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t l = 0; l < m; ++l) {
          const double w = cell_weights_[i] * cell_weights_[j] * cell_weights_[l] * kernel_at(i, j, l);
          far += w * (fx - eval(x[0] + cell_nodes_[i], x[1] + cell_nodes_[j], x[2] + cell_nodes_[l]));
        }
    return constant_ * (near + far + tail_ * (fx - mean.real()));
  }

 private:
  double kernel(double r2) const { return std::exp(-(1.5 + alpha_) * std::log(r2)); }
  double chi(double r) const { return detail::smooth_step((kOuter - r) / (kOuter - kInner)); }

  // Radial rule on [0, kOuter] for integrands g(r) r^{1-2α} χ(r), g = (increment)/r^2;
  // near_w_ carries the factor r^{1-2α} χ(r).
  void build_radial_rules(int points) {
    const int njac = 2 * points;
    const auto gj = gauss_jacobi(njac, 0.0, 1.0 - 2.0 * alpha_);
    const double half = 0.5 * kInner;
    const double scale = std::pow(half, 2.0 - 2.0 * alpha_);
    for (int i = 0; i < njac; ++i) {
      near_r_.push_back(half * (gj.nodes[i] + 1.0));
      near_w_.push_back(scale * gj.weights[i]);
    }
    const auto outer = composite_gauss_legendre(kInner, kOuter, 8, points);
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
      const double r = outer.nodes[i];
      near_r_.push_back(r);
      near_w_.push_back(outer.weights[i] * std::pow(r, 1.0 - 2.0 * alpha_) * chi(r));
    }
    // angular rule for apply_at: Gauss–Legendre in cos(polar) x trapezoid in azimuth
    const auto mu = gauss_legendre(points);
    const int nphi = 2 * points;
    for (int i = 0; i < points; ++i) {
      const double s = std::sqrt(1.0 - mu.nodes[i] * mu.nodes[i]);
      for (int j = 0; j < nphi; ++j) {
        const double phi = (j + 0.5) * 2.0 * std::numbers::pi / nphi;
        sphere_.push_back({s * std::cos(phi), s * std::sin(phi), mu.nodes[i],
                           mu.weights[i] * 2.0 * std::numbers::pi / nphi});
      }
    }
  }

  // F(w) = Σ_{|m|_∞<=S} K(w+2πm) - K(w)χ(|w|) at the tensor nodes of [-π,π]^3.
  void build_cell(int panels, int points) {
    const auto q = composite_gauss_legendre(-std::numbers::pi, std::numbers::pi, panels, points);
    cell_nodes_ = q.nodes;
    cell_weights_ = q.weights;
    const std::size_t m = cell_nodes_.size();
    cell_kernel_.assign(m * m * m, 0.0);
    const double tp = 2.0 * std::numbers::pi;
    // nodes are symmetric: fill sorted |node| triples, then copy by symmetry
    auto mirror = [m](std::size_t i) { return m - 1 - i; };
    const std::size_t half = m / 2;  // indices half..m-1 are the positive nodes
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> base;
    for (std::size_t a = half; a < m; ++a)
      for (std::size_t b = a; b < m; ++b)
        for (std::size_t c = b; c < m; ++c) {
          const double w0 = cell_nodes_[a], w1 = cell_nodes_[b], w2 = cell_nodes_[c];
          double acc = 0.0;
          for (int i = -shells_; i <= shells_; ++i) {
            const double z0 = w0 + tp * i;
            for (int j = -shells_; j <= shells_; ++j) {
              const double z1 = w1 + tp * j;
              for (int l = -shells_; l <= shells_; ++l) {
                const double z2 = w2 + tp * l;
                const double r2 = z0 * z0 + z1 * z1 + z2 * z2;
                acc += (i == 0 && j == 0 && l == 0) ? kernel(r2) * (1.0 - chi(std::sqrt(r2))) : kernel(r2);
              }
            }
          }
          base.emplace(std::make_tuple(a, b, c), acc);
        }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t l = 0; l < m; ++l) {
          std::array<std::size_t, 3> s{i < half ? mirror(i) : i, j < half ? mirror(j) : j, l < half ? mirror(l) : l};
          std::ranges::sort(s);
          cell_kernel_[(i * m + j) * m + l] = base.at(std::make_tuple(s[0], s[1], s[2]));
        }
  }

  double kernel_at(std::size_t i, std::size_t j, std::size_t l) const {
    const std::size_t m = cell_nodes_.size();
    return cell_kernel_[(i * m + j) * m + l];
  }

  // ∫_{B_3} (1 - cos k.z) K χ dz with the angular integral done exactly: 4π(1 - sinc(|k| r)).
  double near_part(double kn) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < near_r_.size(); ++i) {
      const double r = near_r_[i];
      const double x = kn * r;
      // (1 - sinc x)/r^2, series near 0
      const double g = std::abs(x) < 1e-3 ? kn * kn * (1.0 / 6.0 - x * x / 120.0) : (1.0 - std::sin(x) / x) / (r * r);
      acc += near_w_[i] * 4.0 * std::numbers::pi * g;
    }
    return acc;
  }

  // Σ_w F(w)(1 - cos k.w) over the cell; F is even in each coordinate so only the cosine product survives.
  double far_part(const std::array<int, 3>& k) const {
    const std::size_t m = cell_nodes_.size();
    std::vector<double> c0(m), c1(m), c2(m);
    for (std::size_t i = 0; i < m; ++i) {
      c0[i] = std::cos(k[0] * cell_nodes_[i]) * cell_weights_[i];
      c1[i] = std::cos(k[1] * cell_nodes_[i]) * cell_weights_[i];
      c2[i] = std::cos(k[2] * cell_nodes_[i]) * cell_weights_[i];
    }
    double plain = 0.0, osc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double* row = cell_kernel_.data() + (i * m + j) * m;
        double sp = 0.0, so = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
          sp += row[l] * cell_weights_[l];
          so += row[l] * c2[l];
        }
        plain += cell_weights_[i] * cell_weights_[j] * sp;
        osc += c0[i] * c1[j] * so;
      }
    return plain - osc;
  }

  // ∫_{|z|_∞ > L} |z|^{-3-2α} dz = L^{-2α}/(2α) ∫_{S^2} (max_i |ω_i|)^{2α} dω, L = (2S+1)π;
  // the sphere integral is 6 ∫∫_{[-1,1]^2} (1+u^2+v^2)^{-α-3/2} du dv.
  double cube_tail() const {
    const auto q = composite_gauss_legendre(-1.0, 1.0, 2, 24);
    double face = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      for (std::size_t j = 0; j < q.nodes.size(); ++j)
        face += q.weights[i] * q.weights[j] *
                std::pow(1.0 + q.nodes[i] * q.nodes[i] + q.nodes[j] * q.nodes[j], -alpha_ - 1.5);
    const double len = (2.0 * shells_ + 1.0) * std::numbers::pi;
    return 6.0 * face * std::pow(len, -2.0 * alpha_) / (2.0 * alpha_);
  }

  double alpha_;
  int shells_;
  std::vector<double> near_r_, near_w_;
  std::vector<std::array<double, 4>> sphere_;
  std::vector<double> cell_nodes_, cell_weights_, cell_kernel_;
  double tail_ = 0.0;
  double constant_ = 1.0;
  mutable std::map<std::tuple<int, int, int>, double> cache_;
};

/// Exact normalizing constant 4^α Γ(3/2+α) / (π^{3/2} |Γ(-α)|) of the singular-integral form.
inline double frac_laplacian_constant(double alpha) {
  return std::pow(4.0, alpha) * std::tgamma(1.5 + alpha) /
         (std::pow(std::numbers::pi, 1.5) * std::abs(std::tgamma(-alpha)));
}

inline SpectralField frac_laplacian(const SpectralField& f, const FracLaplacianSpec& s) {
  detail::check_alpha(s.alpha, "frac_laplacian");
  if (s.realization == FracRealization::fourier_multiplier) return frac_laplacian_multiplier(f, s.alpha);
  return SingularIntegralLaplacian(s.alpha, s.image_shells).apply(f);
}

}  // namespace holderlab
