// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace scalelab {

// Returns f(x) and writes the gradient into `grad` (same length as x).
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-9;  // on the infinity norm
  double f_rel_tolerance = 1e-12;    // relative decrease over one iteration
  int history = 10;
  double armijo_c1 = 1e-4;
  double backtrack_shrink = 0.5;
  int max_backtracks = 50;
};

enum class LbfgsStatus {
  kGradientConverged,
  kObjectiveConverged,
  kMaxIterations,
  kLineSearchFailed,
  kNonFinite,
};

std::string_view to_string(LbfgsStatus status);

struct LbfgsResult {
  std::vector<double> x;
  std::vector<double> grad;
  double value = 0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;

  bool converged() const noexcept {
    return status == LbfgsStatus::kGradientConverged || status == LbfgsStatus::kObjectiveConverged;
  }
};

// Limited-memory BFGS with a backtracking Armijo line search. When the
// quasi-Newton direction fails to produce sufficient decrease the curvature
// history is dropped and the step is retried along the steepest descent.
LbfgsResult minimize_lbfgs(const ObjectiveFn& objective, std::vector<double> x0,
                           const LbfgsOptions& options = {});

}  // namespace scalelab
