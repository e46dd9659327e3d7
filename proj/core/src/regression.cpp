// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/regression.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "scalelab/error.hpp"

namespace scalelab {

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) raise(ErrorCode::kInvalidArgument, "x and y sizes differ", "y");
  const std::size_t n = x.size();
  if (n < 2) raise(ErrorCode::kTooFewPoints, "regression needs at least 2 points", "x");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double scale = std::max(std::abs(mx), 1.0);
  if (!(sxx > 1e-24 * scale * scale * static_cast<double>(n))) {
    raise(ErrorCode::kTooFewPoints, "regression needs at least 2 distinct x values", "x");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0 ? std::min(1.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) raise(ErrorCode::kInvalidArgument, "x and y sizes differ", "y");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) {
      raise(ErrorCode::kInvalidArgument, "power-law regression needs positive values", "x");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const LinearFit lin = ordinary_least_squares(lx, ly);
  PowerLawFit law;
  law.k = std::exp(lin.intercept);
  law.p = lin.slope;
  law.x_min = *std::min_element(x.begin(), x.end());
  law.x_max = *std::max_element(x.begin(), x.end());
  law.r_squared = lin.r_squared;
  return law;
}

}  // namespace scalelab
