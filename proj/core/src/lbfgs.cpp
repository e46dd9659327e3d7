// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace scalelab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: direction = -H * grad.
void search_direction(const std::deque<CurvaturePair>& memory, std::span<const double> grad,
                      std::vector<double>& direction) {
  const std::size_t n = grad.size();
  direction.assign(grad.begin(), grad.end());
  std::vector<double> alpha(memory.size());
  for (std::size_t j = memory.size(); j-- > 0;) {
    const CurvaturePair& m = memory[j];
    alpha[j] = m.rho * dot(m.s, direction);
    for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[j] * m.y[i];
  }
  if (!memory.empty()) {
    const CurvaturePair& last = memory.back();
    const double scale = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& d : direction) d *= scale;
  }
  for (std::size_t j = 0; j < memory.size(); ++j) {
    const CurvaturePair& m = memory[j];
    const double b = m.rho * dot(m.y, direction);
    for (std::size_t i = 0; i < n; ++i) direction[i] += m.s[i] * (alpha[j] - b);
  }
  for (double& d : direction) d = -d;
}

}  // namespace

std::string_view to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::kGradientConverged: return "gradient_converged";
    case LbfgsStatus::kObjectiveConverged: return "objective_converged";
    case LbfgsStatus::kMaxIterations: return "max_iterations";
    case LbfgsStatus::kLineSearchFailed: return "line_search_failed";
    case LbfgsStatus::kNonFinite: return "non_finite";
  }
  return "unknown";
}

LbfgsResult minimize_lbfgs(const ObjectiveFn& objective, std::vector<double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);
  result.grad.assign(n, 0.0);
  result.value = objective(result.x, result.grad);
  if (!std::isfinite(result.value) || !std::isfinite(inf_norm(result.grad))) {
    result.status = LbfgsStatus::kNonFinite;
    return result;
  }

  std::deque<CurvaturePair> memory;
  std::vector<double> direction;
  std::vector<double> trial_x(n);
  std::vector<double> trial_grad(n);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter;
    if (inf_norm(result.grad) < options.gradient_tolerance) {
      result.status = LbfgsStatus::kGradientConverged;
      return result;
    }

    bool accepted = false;
    double trial_value = 0;
    // At most two attempts: quasi-Newton direction, then steepest descent.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      search_direction(memory, result.grad, direction);
      double slope = dot(result.grad, direction);
      if (!(slope < 0) || !std::isfinite(slope)) {
        memory.clear();
        search_direction(memory, result.grad, direction);
        slope = dot(result.grad, direction);
      }
      double step = 1.0;
      if (memory.empty()) step = std::min(1.0, 1.0 / std::sqrt(dot(result.grad, result.grad)));

      for (int bt = 0; bt <= options.max_backtracks; ++bt) {
        for (std::size_t i = 0; i < n; ++i) trial_x[i] = result.x[i] + step * direction[i];
        trial_value = objective(trial_x, trial_grad);
        if (std::isfinite(trial_value) && std::isfinite(inf_norm(trial_grad)) &&
            trial_value <= result.value + options.armijo_c1 * step * slope) {
          accepted = true;
          break;
        }
        step *= options.backtrack_shrink;
      }
      if (!accepted) {
        if (memory.empty()) break;
        memory.clear();
      }
    }
    if (!accepted) {
      result.status = LbfgsStatus::kLineSearchFailed;
      return result;
    }

    CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = trial_x[i] - result.x[i];
      pair.y[i] = trial_grad[i] - result.grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > std::numeric_limits<double>::epsilon() * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    const double previous = result.value;
    result.x.swap(trial_x);
    result.grad.swap(trial_grad);
    result.value = trial_value;

    const double scale = std::max({std::abs(previous), std::abs(trial_value),
                                   std::numeric_limits<double>::min()});
    if (previous - trial_value <= options.f_rel_tolerance * scale) {
      result.iterations = iter + 1;
      result.status = inf_norm(result.grad) < options.gradient_tolerance
                          ? LbfgsStatus::kGradientConverged
                          : LbfgsStatus::kObjectiveConverged;
      return result;
    }
  }
  result.iterations = options.max_iterations;
  result.status = inf_norm(result.grad) < options.gradient_tolerance
                      ? LbfgsStatus::kGradientConverged
                      : LbfgsStatus::kMaxIterations;
  return result;
}

}  // namespace scalelab
