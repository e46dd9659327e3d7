// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "scalelab/loss_fit.hpp"

namespace scalelab {

struct PredictionMetrics {
  double mse = 0;
  double r_squared = 0;
  double mae_percent = 0;  // mean of |predicted - observed| / observed, times 100
};

// Metrics of predictions against observed losses. Needs >= 2 points;
// kZeroVariance when every observed loss is equal.
PredictionMetrics evaluate_predictions(std::span<const double> predicted, std::span<const double> observed);

PredictionMetrics evaluate(const LossSurfaceFit& fit, std::span<const LossPoint> points);

}  // namespace scalelab
