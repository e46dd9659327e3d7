// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "scalelab/loss_fit.hpp"

namespace scalelab {

struct SparsePoint {
  double n = 0;         // active parameters
  double d = 0;         // tokens
  double sparsity = 0;  // S in [0, 1)
  double loss = 0;
};

// Log-domain parameters: A = exp(a), B = exp(b), C = exp(c), d = exp(dd),
// E = exp(e).
struct SparseParams {
  double a = 0;
  double b = 0;
  double c = 0;
  double dd = 0;
  double e = 0;
  double alpha = 0;
  double beta = 0;
  double lam = 0;
  double delta_s = 0;
  double gamma = 0;

  std::array<double, 10> as_array() const { return {a, b, c, dd, e, alpha, beta, lam, delta_s, gamma}; }
  static SparseParams from_span(std::span<const double> x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9]};
  }
};

struct SparseFitConfig {
  FitConfig dense;  // Huber delta, optimizer settings, first-stage grid
  std::optional<double> fixed_lambda;
  std::optional<double> fixed_delta;
  std::optional<double> fixed_gamma;
  std::vector<double> init_grid_lambda_delta{0.1, 0.2, 0.5};
  std::vector<double> init_grid_gamma{0.3, 0.7, 1.0};
  std::vector<double> init_grid_c_d{0.0, 5.0, 10.0};  // log C and log d
  int dense_seeds = 3;                                // best first-stage solutions reused

  void validate() const;
};

struct SparseObjectiveValue {
  double value = 0;
  std::array<double, 10> gradient{};  // same order as SparseParams::as_array
};

// Huber over LSE of the five log terms against log L.
SparseObjectiveValue sparse_objective(const SparseParams& params, std::span<const SparsePoint> points,
                                      double delta);

// Starts of the second stage, in enumeration order: dense seed, lambda,
// delta, gamma, log C, log d (last varies fastest). Fixed exponents take
// their fixed value.
std::vector<SparseParams> sparse_initialization(std::span<const SparsePoint> points,
                                                const SparseFitConfig& config);

// Throws kTooFewPoints below 10 points, kDegenerateSparsity when every S is
// equal while lambda or delta is free, kAllInitsFailed if nothing converges.
SparseLossSurfaceFit fit_sparse(std::span<const SparsePoint> points, const SparseFitConfig& config = {});

double predict_sparse_loss(const SparseLossSurfaceFit& fit, double n, double d, double sparsity);

// N = n_active, S = 1 - n_active / n_total.
std::vector<SparsePoint> sparse_points(std::span<const RunRecord> runs);

}  // namespace scalelab
