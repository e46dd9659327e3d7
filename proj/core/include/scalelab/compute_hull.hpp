// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "scalelab/types.hpp"

namespace scalelab {

struct FlopsLoss {
  double c = 0;
  double loss = 0;

  bool operator==(const FlopsLoss&) const = default;
};

// Model size (any label that orders series) to its (C, L) points.
using SeriesMap = std::map<double, std::vector<FlopsLoss>>;

inline constexpr std::size_t kDefaultEnvelopePoints = 512;
inline constexpr double kDefaultMinFlops = 3e19;

// Lower envelope of all series on a log-spaced C grid, each series
// interpolated linearly in (log C, log L) inside its own range.
std::vector<FlopsLoss> minimum_envelope(const SeriesMap& series,
                                        std::size_t grid_points = kDefaultEnvelopePoints);

// Lower convex hull of the envelope in log-log space, sorted by C.
// Throws kEmptySeries when there are no series or a series has < 2 points.
std::vector<FlopsLoss> frontier_points(const SeriesMap& series,
                                       std::size_t grid_points = kDefaultEnvelopePoints);

// Power law L = k C^c fitted by OLS of log L on log C. The piecewise-linear
// hull is sampled on grid_points log-spaced budgets strictly above
// c_min_flops, so dense and sparse stretches of the hull weigh by their
// extent in log C. Throws kTooFewPoints without two hull vertices above the
// threshold.
PowerLawFit fit_compute_law(std::span<const FlopsLoss> hull, double c_min_flops = kDefaultMinFlops,
                            std::size_t grid_points = kDefaultEnvelopePoints);

// Groups runs by model parameters, using each run's training FLOPs.
SeriesMap series_from_runs(std::span<const RunRecord> runs);

}  // namespace scalelab
