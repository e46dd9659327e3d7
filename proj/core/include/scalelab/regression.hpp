// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "scalelab/types.hpp"

namespace scalelab {

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
};

// Ordinary least squares y = slope * x + intercept. Needs at least two
// distinct x values (kTooFewPoints otherwise). r_squared is 1 when y is
// constant and perfectly predicted.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

// y = k * x^p fitted by OLS of log y on log x. Inputs must be positive.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace scalelab
