// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/metrics.hpp"

#include <cmath>
#include <vector>

#include "scalelab/error.hpp"

namespace scalelab {

PredictionMetrics evaluate_predictions(std::span<const double> predicted, std::span<const double> observed) {
  if (predicted.size() != observed.size()) {
    raise(ErrorCode::kInvalidArgument, "prediction and observation counts differ", "points");
  }
  const std::size_t n = observed.size();
  if (n < 2) raise(ErrorCode::kTooFewPoints, "metrics need at least 2 points", "points");
  double mean = 0;
  for (double l : observed) {
    if (!(l > 0)) raise(ErrorCode::kInvalidArgument, "observed losses must be positive", "loss");
    mean += l;
  }
  mean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0, rel = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = predicted[i] - observed[i];
    ss_res += err * err;
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
    rel += std::abs(err) / observed[i];
  }
  if (ss_tot == 0) raise(ErrorCode::kZeroVariance, "observed losses are all equal", "loss");
  PredictionMetrics m;
  m.mse = ss_res / static_cast<double>(n);
  m.r_squared = 1.0 - ss_res / ss_tot;
  m.mae_percent = 100.0 * rel / static_cast<double>(n);
  return m;
}

PredictionMetrics evaluate(const LossSurfaceFit& fit, std::span<const LossPoint> points) {
  std::vector<double> predicted, observed;
  predicted.reserve(points.size());
  observed.reserve(points.size());
  for (const LossPoint& p : points) {
    predicted.push_back(predict_loss(fit, p.n, p.d));
    observed.push_back(p.loss);
  }
  return evaluate_predictions(predicted, observed);
}

}  // namespace scalelab
