#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "holderlab/error.hpp"

namespace holderlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "fit_line: need at least two matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("fit_line: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : std::min(1.0, std::max(0.0, sxy * sxy / (sxx * syy)));
  return f;
}

/// Fit of log y against log x; every value must be positive and finite.
inline LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw NumericalError("fit_loglog: non-positive or non-finite value at rung " + std::to_string(i));
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

/// A measured power law over a ladder of scales: log y = slope log x + intercept.
struct ScalingReport {
  std::string quantity;
  double target = 0.0;  // expected slope
  double slope = 0.0;
  double intercept = 0.0;  // log of the fitted constant
  double r_squared = 0.0;
  std::vector<double> x;
  std::vector<double> y;

  double constant() const { return std::exp(intercept); }
};

inline ScalingReport make_scaling_report(std::string quantity, double target, std::vector<double> x,
                                         std::vector<double> y) {
  const auto f = fit_loglog(x, y);
  return {std::move(quantity), target, f.slope, f.intercept, f.r_squared, std::move(x), std::move(y)};
}

inline double median(std::vector<double> v) {
  detail::require(!v.empty(), "median: empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace holderlab
