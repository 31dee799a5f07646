#pragma once

// Gauss rules from the Golub–Welsch eigenproblem.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "holderlab/error.hpp"

namespace holderlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Affine map of a rule on [-1,1] to [a,b] (plain weight only).
  QuadratureRule mapped(double a, double b) const {
    QuadratureRule r{nodes, weights};
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      r.nodes[i] = a + half * (nodes[i] + 1.0);
      r.weights[i] *= half;
    }
    return r;
  }
};

namespace detail {

inline QuadratureRule golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag_sq,
                                   double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) jm(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) jm(i, i + 1) = jm(i + 1, i) = std::sqrt(offdiag_sq[i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  if (es.info() != Eigen::Success) throw NumericalError("golub_welsch: eigensolver failed");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v * v;
  }
  return r;
}

}  // namespace detail

/// n-point Gauss–Legendre rule on [-1,1]; exact for polynomials of degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
  detail::require(n >= 1, "gauss_legendre: need at least one node");
  std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = double(k) * k / (4.0 * k * k - 1.0);
  auto r = detail::golub_welsch(diag, off, 2.0);
  // symmetrize against eigensolver round-off
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

/// n-point Gauss–Jacobi rule on [-1,1] for the weight (1-x)^a (1+x)^b, a,b > -1.
inline QuadratureRule gauss_jacobi(int n, double a, double b) {
  detail::require(n >= 1 && a > -1.0 && b > -1.0, "gauss_jacobi: need n >= 1 and a, b > -1");
  std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    diag[k] = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
    double den = s * s * (s + 1.0) * (s - 1.0);
    if (k == 1) {  // avoids 0/0 when a + b = -1 or 0
      num = 4.0 * (1.0 + a) * (1.0 + b);
      den = (2.0 + ab) * (2.0 + ab) * (3.0 + ab);
    }
    off[k - 1] = num / den;
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                              std::lgamma(ab + 2.0));
  return detail::golub_welsch(diag, off, mu0);
}

/// Composite Gauss–Legendre on [a,b] with equal panels.
inline QuadratureRule composite_gauss_legendre(double a, double b, int panels, int points) {
  detail::require(panels >= 1 && b > a, "composite_gauss_legendre: need panels >= 1 and b > a");
  const auto base = gauss_legendre(points);
  QuadratureRule r;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto q = base.mapped(a + p * w, a + (p + 1) * w);
    r.nodes.insert(r.nodes.end(), q.nodes.begin(), q.nodes.end());
    r.weights.insert(r.weights.end(), q.weights.begin(), q.weights.end());
  }
  return r;
}

}  // namespace holderlab
