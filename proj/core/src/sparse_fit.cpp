// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/sparse_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scalelab/error.hpp"
#include "scalelab/parallel.hpp"

namespace scalelab {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr std::size_t kLambda = 7, kDelta = 8, kGamma = 9;

struct LogPoint {
  double log_n;
  double log_d;
  double log_dense;  // log(1 - S)
  double log_loss;
};

std::vector<LogPoint> to_log_points(std::span<const SparsePoint> points) {
  std::vector<LogPoint> out;
  out.reserve(points.size());
  for (const SparsePoint& p : points) {
    if (!(p.n >= 1 && p.d >= 1 && p.loss > 0 && p.sparsity >= 0 && p.sparsity < 1) ||
        !std::isfinite(p.n) || !std::isfinite(p.d) || !std::isfinite(p.loss)) {
      raise(ErrorCode::kInvalidArgument, "sparse points need N, D >= 1, L > 0 and S in [0, 1)",
            "points");
    }
    out.push_back({std::log(p.n), std::log(p.d), std::log1p(-p.sparsity), std::log(p.loss)});
  }
  return out;
}

double evaluate(std::span<const double> x, std::span<const LogPoint> points, double delta,
                std::span<double> grad) {
  const SparseParams q = SparseParams::from_span(x);
  double value = 0;
  std::array<double, 10> g{};
  for (const LogPoint& p : points) {
    const std::array<double, 5> t{q.a - q.alpha * p.log_n, q.b - q.beta * p.log_d,
                                  q.c - q.lam * p.log_dense,
                                  q.dd - q.delta_s * p.log_dense - q.gamma * p.log_n, q.e};
    const double m = *std::max_element(t.begin(), t.end());
    std::array<double, 5> w{};
    double sum = 0;
    for (int k = 0; k < 5; ++k) sum += (w[k] = std::exp(t[k] - m));
    const double r = m + std::log(sum) - p.log_loss;
    value += huber(r, delta);
    const double psi = huber_derivative(r, delta) / sum;
    g[0] += psi * w[0];
    g[1] += psi * w[1];
    g[2] += psi * w[2];
    g[3] += psi * w[3];
    g[4] += psi * w[4];
    g[5] -= psi * w[0] * p.log_n;
    g[6] -= psi * w[1] * p.log_d;
    g[7] -= psi * w[2] * p.log_dense;
    g[8] -= psi * w[3] * p.log_dense;
    g[9] -= psi * w[3] * p.log_n;
  }
  std::copy(g.begin(), g.end(), grad.begin());
  for (double v : g) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  }
  return std::isfinite(value) ? value : std::numeric_limits<double>::quiet_NaN();
}

std::array<std::optional<double>, 10> fixed_slots(const SparseFitConfig& config) {
  std::array<std::optional<double>, 10> fixed{};
  fixed[kLambda] = config.fixed_lambda;
  fixed[kDelta] = config.fixed_delta;
  fixed[kGamma] = config.fixed_gamma;
  return fixed;
}

std::vector<double> axis(const std::optional<double>& fixed, const std::vector<double>& grid) {
  return fixed ? std::vector<double>{*fixed} : grid;
}

bool representable(const SparseParams& p) {
  for (double v : {p.a, p.b, p.c, p.dd, p.e}) {
    const double ev = std::exp(v);
    if (!std::isfinite(ev) || !(ev > 0)) return false;
  }
  return true;
}

}  // namespace

void SparseFitConfig::validate() const {
  dense.validate();
  require(!init_grid_lambda_delta.empty(), "init_grid_lambda_delta", "must not be empty");
  require(!init_grid_gamma.empty(), "init_grid_gamma", "must not be empty");
  require(!init_grid_c_d.empty(), "init_grid_c_d", "must not be empty");
  require(dense_seeds > 0, "dense_seeds", "must be > 0");
  for (const auto& f : {fixed_lambda, fixed_delta, fixed_gamma}) {
    require(!f || std::isfinite(*f), "fixed exponent", "must be finite");
  }
}

SparseObjectiveValue sparse_objective(const SparseParams& params, std::span<const SparsePoint> points,
                                      double delta) {
  const std::vector<LogPoint> logs = to_log_points(points);
  SparseObjectiveValue out;
  const std::array<double, 10> x = params.as_array();
  out.value = evaluate(x, logs, delta, out.gradient);
  if (!std::isfinite(out.value)) {
    raise(ErrorCode::kNonFiniteObjective, "sparse objective is not finite at the given parameters");
  }
  return out;
}

std::vector<SparseParams> sparse_initialization(std::span<const SparsePoint> points,
                                                const SparseFitConfig& config) {
  config.validate();
  std::vector<LossPoint> dense_points;
  dense_points.reserve(points.size());
  for (const SparsePoint& p : points) dense_points.push_back({p.n, p.d, p.loss});
  const FitReport dense = fit_loss_surface_report(dense_points, config.dense);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dense.starts.size(); ++i) {
    if (dense.starts[i].finite) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return dense.starts[l].objective < dense.starts[r].objective;
  });
  // Distinct seeds only; many grid starts land on the same optimum.
  std::vector<SurfaceParams> seeds;
  for (std::size_t i : order) {
    if (seeds.size() >= static_cast<std::size_t>(config.dense_seeds)) break;
    const SurfaceParams& cand = dense.starts[i].params;
    const bool seen = std::any_of(seeds.begin(), seeds.end(), [&](const SurfaceParams& s) {
      return std::abs(s.alpha - cand.alpha) < 1e-6 && std::abs(s.beta - cand.beta) < 1e-6 &&
             std::abs(s.e - cand.e) < 1e-6;
    });
    if (!seen) seeds.push_back(cand);
  }

  const std::vector<double> lams = axis(config.fixed_lambda, config.init_grid_lambda_delta);
  const std::vector<double> deltas = axis(config.fixed_delta, config.init_grid_lambda_delta);
  const std::vector<double> gammas = axis(config.fixed_gamma, config.init_grid_gamma);
  std::vector<SparseParams> starts;
  for (const SurfaceParams& s : seeds)
    for (double lam : lams)
      for (double del : deltas)
        for (double gam : gammas)
          for (double c : config.init_grid_c_d)
            for (double dd : config.init_grid_c_d)
              starts.push_back({s.a, s.b, c, dd, s.e, s.alpha, s.beta, lam, del, gam});
  return starts;
}

SparseLossSurfaceFit fit_sparse(std::span<const SparsePoint> points, const SparseFitConfig& config) {
  config.validate();
  if (points.size() < 10) raise(ErrorCode::kTooFewPoints, "sparse fit needs at least 10 points", "points");
  const std::vector<LogPoint> logs = to_log_points(points);
  const bool all_equal = std::all_of(logs.begin(), logs.end(), [&](const LogPoint& p) {
    return p.log_dense == logs.front().log_dense;
  });
  if (all_equal && (!config.fixed_lambda || !config.fixed_delta)) {
    raise(ErrorCode::kDegenerateSparsity,
          "all points share one sparsity level; fix lambda and delta to fit", "sparsity");
  }

  const std::vector<SparseParams> starts = sparse_initialization(points, config);
  const auto fixed = fixed_slots(config);
  std::vector<std::size_t> free_slots;
  for (std::size_t k = 0; k < 10; ++k) {
    if (!fixed[k]) free_slots.push_back(k);
  }
  const double delta = config.dense.huber_delta;
  const LbfgsOptions options = config.dense.lbfgs_options();

  struct Outcome {
    SparseParams params;
    double objective = 0;
    bool finite = false;
    bool converged = false;
  };
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), config.dense.threads, [&](std::size_t i) {
    std::array<double, 10> full = starts[i].as_array();
    for (std::size_t k = 0; k < 10; ++k) {
      if (fixed[k]) full[k] = *fixed[k];
    }
    const ObjectiveFn fn = [&](std::span<const double> x, std::span<double> g) {
      std::array<double, 10> xf = full;
      std::array<double, 10> gf{};
      for (std::size_t j = 0; j < free_slots.size(); ++j) xf[free_slots[j]] = x[j];
      const double v = evaluate(xf, logs, delta, gf);
      for (std::size_t j = 0; j < free_slots.size(); ++j) g[j] = gf[free_slots[j]];
      return v;
    };
    std::vector<double> x0;
    for (std::size_t k : free_slots) x0.push_back(full[k]);
    const LbfgsResult r = minimize_lbfgs(fn, x0, options);
    for (std::size_t j = 0; j < free_slots.size(); ++j) full[free_slots[j]] = r.x[j];
    Outcome& out = outcomes[i];
    out.params = SparseParams::from_span(full);
    out.objective = r.value;
    out.finite = r.status != LbfgsStatus::kNonFinite && std::isfinite(r.value);
    out.converged = out.finite && r.converged();
  });

  int best = -1;
  bool any_converged = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (!o.finite || !representable(o.params)) continue;
    any_converged = any_converged || o.converged;
    if (best < 0 || o.objective < outcomes[best].objective - kTieTolerance) best = static_cast<int>(i);
  }
  if (best < 0 || !any_converged) raise(ErrorCode::kAllInitsFailed, "no sparse initialization converged");
  const Outcome& w = outcomes[best];
  SparseLossSurfaceFit fit;
  fit.e_irr = std::exp(w.params.e);
  fit.a_coef = std::exp(w.params.a);
  fit.b_coef = std::exp(w.params.b);
  fit.c_coef = std::exp(w.params.c);
  fit.d_coef = std::exp(w.params.dd);
  fit.alpha = w.params.alpha;
  fit.beta = w.params.beta;
  fit.lam = w.params.lam;
  fit.delta_s = w.params.delta_s;
  fit.gamma = w.params.gamma;
  fit.objective = w.objective;
  fit.converged = w.converged;
  return fit;
}

double predict_sparse_loss(const SparseLossSurfaceFit& fit, double n, double d, double sparsity) {
  if (!(n >= 1 && d >= 1 && sparsity >= 0 && sparsity < 1)) {
    raise(ErrorCode::kInvalidArgument, "prediction needs n, d >= 1 and S in [0, 1)", "sparsity");
  }
  const double dense = 1.0 - sparsity;
  return fit.e_irr + fit.a_coef * std::pow(n, -fit.alpha) + fit.b_coef * std::pow(d, -fit.beta) +
         fit.c_coef * std::pow(dense, -fit.lam) +
         fit.d_coef * std::pow(dense, -fit.delta_s) * std::pow(n, -fit.gamma);
}

std::vector<SparsePoint> sparse_points(std::span<const RunRecord> runs) {
  std::vector<SparsePoint> out;
  out.reserve(runs.size());
  for (const RunRecord& r : runs) out.push_back({r.n_active(), r.tokens(), r.sparsity(), r.loss()});
  return out;
}

}  // namespace scalelab
