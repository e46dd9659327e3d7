// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "scalelab/lbfgs.hpp"
#include "scalelab/types.hpp"

namespace scalelab {

struct LossPoint {
  double n = 0;     // parameters
  double d = 0;     // tokens
  double loss = 0;  // nats
};

// Parameters in the log domain used by the optimizer:
// E = exp(e), A = exp(a), B = exp(b).
struct SurfaceParams {
  double a = 0;
  double b = 0;
  double e = 0;
  double alpha = 0;
  double beta = 0;

  std::array<double, 5> as_array() const { return {a, b, e, alpha, beta}; }
  static SurfaceParams from_span(std::span<const double> x) { return {x[0], x[1], x[2], x[3], x[4]}; }
  bool operator==(const SurfaceParams&) const = default;
};

struct FitConfig {
  double huber_delta = 1e-3;
  std::vector<double> init_grid_alpha_beta{0.0, 0.5, 2.5};
  std::vector<double> init_grid_a_b{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<double> init_grid_e{-1.0, -0.5, 0.5, 1.0};
  int max_iterations = 1000;
  double gradient_tolerance = 1e-9;
  double f_rel_tolerance = 1e-12;
  int lbfgs_history = 10;
  unsigned threads = 0;  // 0 = all hardware threads; never changes the result

  void validate() const;
  LbfgsOptions lbfgs_options() const;
};

double huber(double r, double delta);
double huber_derivative(double r, double delta);

struct ObjectiveValue {
  double value = 0;
  std::array<double, 5> gradient{};  // d/d(a, b, e, alpha, beta)
};

// Sum over points of Huber_delta(LSE(a - alpha log N, b - beta log D, e) - log L)
// with its exact gradient. Throws kNonFiniteObjective on overflow or NaN.
ObjectiveValue huber_lse_objective(const SurfaceParams& params, std::span<const LossPoint> points,
                                   double delta);

// Cartesian initialization grid. Enumeration order is a, b, e, alpha, beta
// with beta varying fastest; the position is the reported init index.
std::vector<SurfaceParams> initialization_grid(const FitConfig& config);

struct StartOutcome {
  SurfaceParams params;
  double objective = 0;
  bool converged = false;
  bool finite = false;
};

struct FitReport {
  LossSurfaceFit fit;
  std::vector<StartOutcome> starts;  // one per supplied start, same order
};

// Runs L-BFGS from every start and keeps the lowest final objective. Starts
// whose objectives differ by less than 1e-12 tie and the lower index wins.
FitReport fit_from_starts(std::span<const LossPoint> points, std::span<const SurfaceParams> starts,
                          const FitConfig& config);

// Full grid-searched fit. Requires at least 6 points.
FitReport fit_loss_surface_report(std::span<const LossPoint> points, const FitConfig& config = {});
LossSurfaceFit fit_loss_surface(std::span<const LossPoint> points, const FitConfig& config = {});

double predict_loss(const LossSurfaceFit& fit, double n, double d);

SurfaceParams to_log_params(const LossSurfaceFit& fit);

// (model_params, tokens, loss) for each run.
std::vector<LossPoint> loss_points(std::span<const RunRecord> runs);

}  // namespace scalelab
