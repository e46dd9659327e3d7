// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scalelab/error.hpp"
#include "scalelab/parallel.hpp"
#include "scalelab/rng.hpp"

namespace scalelab {

std::string_view to_string(BootstrapCoef coef) {
  switch (coef) {
    case BootstrapCoef::kE: return "E";
    case BootstrapCoef::kAlpha: return "alpha";
    case BootstrapCoef::kBeta: return "beta";
    case BootstrapCoef::kA: return "a";
    case BootstrapCoef::kB: return "b";
    case BootstrapCoef::kD: return "d";
  }
  return "?";
}

MeanStd mean_std(std::span<const double> values) {
  if (values.size() < 2) raise(ErrorCode::kTooFewPoints, "need at least 2 values", "values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1))};
}

namespace {

std::array<double, 6> coefficients(const LossSurfaceFit& fit) {
  const double sum = fit.alpha + fit.beta;
  const double a = fit.beta / sum;
  const double b = 1.0 - a;
  return {fit.e_irreducible, fit.alpha, fit.beta, a, b, b / a};
}

}  // namespace

BootstrapResult bootstrap(std::span<const LossPoint> points, const FitConfig& config,
                          const BootstrapConfig& boot) {
  if (boot.iterations < 2) raise(ErrorCode::kInvalidArgument, "iterations must be >= 2", "iterations");
  if (boot.fallback_inits < 0) {
    raise(ErrorCode::kInvalidArgument, "fallback_inits must be >= 0", "fallback_inits");
  }
  const FitReport full = fit_loss_surface_report(points, config);

  // Warm start first, then the best grid starts by final objective.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < full.starts.size(); ++i) {
    if (full.starts[i].finite) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return full.starts[l].objective < full.starts[r].objective;
  });
  const std::vector<SurfaceParams> grid = initialization_grid(config);
  std::vector<SurfaceParams> starts{to_log_params(full.fit)};
  for (std::size_t i = 0; i < order.size() && starts.size() < 1 + static_cast<std::size_t>(boot.fallback_inits); ++i) {
    starts.push_back(grid[order[i]]);
  }

  FitConfig inner = config;
  inner.threads = 1;
  const std::size_t p = points.size();
  BootstrapResult result;
  result.iterations = boot.iterations;
  result.seed = boot.seed;
  result.full_fit = full.fit;
  result.samples.resize(static_cast<std::size_t>(boot.iterations));
  parallel_for(result.samples.size(), config.threads, [&](std::size_t it) {
    Xoshiro256 rng(boot.seed, it);
    std::vector<LossPoint> sample(p);
    for (auto& s : sample) s = points[rng.below(p)];
    try {
      FitReport report;
      try {
        report = fit_from_starts(sample, starts, inner);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kAllInitsFailed) throw;
        report = fit_from_starts(sample, grid, inner);
      }
      result.samples[it] = coefficients(report.fit);
    } catch (const Error& e) {
      raise(ErrorCode::kBootstrapFailed, "iteration " + std::to_string(it) + ": " + e.what(),
            "iteration " + std::to_string(it));
    }
  });

  std::vector<double> column(result.samples.size());
  for (std::size_t k = 0; k < kBootstrapCoefs.size(); ++k) {
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = result.samples[i][k];
    result.stats[k] = mean_std(column);
  }
  return result;
}

}  // namespace scalelab
