// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/loss_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scalelab/error.hpp"
#include "scalelab/parallel.hpp"

namespace scalelab {

namespace {

constexpr double kTieTolerance = 1e-12;

struct LogPoint {
  double log_n;
  double log_d;
  double log_loss;
};

std::vector<LogPoint> to_log_points(std::span<const LossPoint> points) {
  std::vector<LogPoint> out;
  out.reserve(points.size());
  for (const LossPoint& p : points) {
    if (!(p.n >= 1 && p.d >= 1 && p.loss > 0) || !std::isfinite(p.n) || !std::isfinite(p.d) ||
        !std::isfinite(p.loss)) {
      raise(ErrorCode::kInvalidArgument, "loss points need N >= 1, D >= 1 and L > 0", "points");
    }
    out.push_back({std::log(p.n), std::log(p.d), std::log(p.loss)});
  }
  return out;
}

// Objective kernel shared by the public entry point and the optimizer.
// Returns NaN instead of throwing so line searches can back off.
double evaluate(std::span<const double> x, std::span<const LogPoint> points, double delta,
                std::span<double> grad) {
  const double a = x[0], b = x[1], e = x[2], alpha = x[3], beta = x[4];
  double value = 0;
  std::array<double, 5> g{};
  for (const LogPoint& p : points) {
    const double t0 = a - alpha * p.log_n;
    const double t1 = b - beta * p.log_d;
    const double t2 = e;
    const double m = std::max({t0, t1, t2});
    const double x0 = std::exp(t0 - m), x1 = std::exp(t1 - m), x2 = std::exp(t2 - m);
    const double sum = x0 + x1 + x2;
    const double r = m + std::log(sum) - p.log_loss;
    value += huber(r, delta);
    const double psi = huber_derivative(r, delta) / sum;
    g[0] += psi * x0;
    g[1] += psi * x1;
    g[2] += psi * x2;
    g[3] -= psi * x0 * p.log_n;
    g[4] -= psi * x1 * p.log_d;
  }
  std::copy(g.begin(), g.end(), grad.begin());
  for (double v : g) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  }
  return std::isfinite(value) ? value : std::numeric_limits<double>::quiet_NaN();
}

LossSurfaceFit to_fit(const SurfaceParams& p, double objective, int index, bool converged,
                      double delta) {
  LossSurfaceFit fit;
  fit.e_irreducible = std::exp(p.e);
  fit.a_coef = std::exp(p.a);
  fit.b_coef = std::exp(p.b);
  fit.alpha = p.alpha;
  fit.beta = p.beta;
  fit.objective = objective;
  fit.winning_init_index = index;
  fit.converged = converged;
  fit.huber_delta = delta;
  return fit;
}

}  // namespace

void FitConfig::validate() const {
  require(huber_delta > 0 && std::isfinite(huber_delta), "huber_delta", "must be > 0");
  require(!init_grid_alpha_beta.empty(), "init_grid_alpha_beta", "must not be empty");
  require(!init_grid_a_b.empty(), "init_grid_a_b", "must not be empty");
  require(!init_grid_e.empty(), "init_grid_e", "must not be empty");
  require(max_iterations > 0, "max_iterations", "must be > 0");
  require(gradient_tolerance > 0, "gradient_tolerance", "must be > 0");
  require(f_rel_tolerance > 0, "f_rel_tolerance", "must be > 0");
  require(lbfgs_history > 0, "lbfgs_history", "must be > 0");
}

LbfgsOptions FitConfig::lbfgs_options() const {
  LbfgsOptions o;
  o.max_iterations = max_iterations;
  o.gradient_tolerance = gradient_tolerance;
  o.f_rel_tolerance = f_rel_tolerance;
  o.history = lbfgs_history;
  return o;
}

double huber(double r, double delta) {
  const double ar = std::abs(r);
  return ar <= delta ? 0.5 * r * r : delta * (ar - 0.5 * delta);
}

double huber_derivative(double r, double delta) { return std::clamp(r, -delta, delta); }

ObjectiveValue huber_lse_objective(const SurfaceParams& params, std::span<const LossPoint> points,
                                   double delta) {
  const std::vector<LogPoint> logs = to_log_points(points);
  ObjectiveValue out;
  const std::array<double, 5> x = params.as_array();
  out.value = evaluate(x, logs, delta, out.gradient);
  if (!std::isfinite(out.value)) {
    raise(ErrorCode::kNonFiniteObjective, "objective is not finite at the given parameters");
  }
  return out;
}

std::vector<SurfaceParams> initialization_grid(const FitConfig& config) {
  std::vector<SurfaceParams> grid;
  grid.reserve(config.init_grid_a_b.size() * config.init_grid_a_b.size() * config.init_grid_e.size() *
               config.init_grid_alpha_beta.size() * config.init_grid_alpha_beta.size());
  for (double a : config.init_grid_a_b)
    for (double b : config.init_grid_a_b)
      for (double e : config.init_grid_e)
        for (double alpha : config.init_grid_alpha_beta)
          for (double beta : config.init_grid_alpha_beta) grid.push_back({a, b, e, alpha, beta});
  return grid;
}

FitReport fit_from_starts(std::span<const LossPoint> points, std::span<const SurfaceParams> starts,
                          const FitConfig& config) {
  config.validate();
  if (starts.empty()) raise(ErrorCode::kInvalidArgument, "no initialization points", "starts");
  const std::vector<LogPoint> logs = to_log_points(points);
  const double delta = config.huber_delta;
  const LbfgsOptions options = config.lbfgs_options();
  const ObjectiveFn fn = [&](std::span<const double> x, std::span<double> g) {
    return evaluate(x, logs, delta, g);
  };

  FitReport report;
  report.starts.resize(starts.size());
  parallel_for(starts.size(), config.threads, [&](std::size_t i) {
    const std::array<double, 5> x0 = starts[i].as_array();
    LbfgsResult r = minimize_lbfgs(fn, std::vector<double>(x0.begin(), x0.end()), options);
    StartOutcome& out = report.starts[i];
    out.params = SurfaceParams::from_span(r.x);
    out.objective = r.value;
    out.finite = r.status != LbfgsStatus::kNonFinite && std::isfinite(r.value);
    out.converged = out.finite && r.converged();
  });

  int best = -1;
  bool any_converged = false;
  for (std::size_t i = 0; i < report.starts.size(); ++i) {
    const StartOutcome& s = report.starts[i];
    if (!s.finite) continue;
    // exp() of the log-domain coefficients must stay representable.
    if (!std::isfinite(std::exp(s.params.a)) || !std::isfinite(std::exp(s.params.b)) ||
        !std::isfinite(std::exp(s.params.e)) || std::exp(s.params.e) <= 0 ||
        std::exp(s.params.a) <= 0 || std::exp(s.params.b) <= 0) {
      continue;
    }
    any_converged = any_converged || s.converged;
    if (best < 0 || s.objective < report.starts[best].objective - kTieTolerance) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || !any_converged) {
    raise(ErrorCode::kAllInitsFailed, "no initialization converged");
  }
  const StartOutcome& w = report.starts[best];
  report.fit = to_fit(w.params, w.objective, best, w.converged, delta);
  return report;
}

FitReport fit_loss_surface_report(std::span<const LossPoint> points, const FitConfig& config) {
  if (points.size() < 6) {
    raise(ErrorCode::kTooFewPoints, "need at least 6 points to fit 5 coefficients", "points");
  }
  config.validate();
  const std::vector<SurfaceParams> grid = initialization_grid(config);
  return fit_from_starts(points, grid, config);
}

LossSurfaceFit fit_loss_surface(std::span<const LossPoint> points, const FitConfig& config) {
  return fit_loss_surface_report(points, config).fit;
}

double predict_loss(const LossSurfaceFit& fit, double n, double d) {
  if (!(n >= 1 && d >= 1)) raise(ErrorCode::kInvalidArgument, "prediction needs n, d >= 1", "n");
  return fit.e_irreducible + fit.a_coef * std::pow(n, -fit.alpha) + fit.b_coef * std::pow(d, -fit.beta);
}

SurfaceParams to_log_params(const LossSurfaceFit& fit) {
  return {std::log(fit.a_coef), std::log(fit.b_coef), std::log(fit.e_irreducible), fit.alpha, fit.beta};
}

std::vector<LossPoint> loss_points(std::span<const RunRecord> runs) {
  std::vector<LossPoint> out;
  out.reserve(runs.size());
  for (const RunRecord& r : runs) out.push_back({r.model_params(), r.tokens(), r.loss()});
  return out;
}

}  // namespace scalelab
