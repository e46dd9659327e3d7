// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scalelab/error.hpp"
#include "scalelab/flops.hpp"
#include "scalelab/loss_fit.hpp"
#include "scalelab/parallel.hpp"
#include "scalelab/regression.hpp"

namespace scalelab {

namespace {

// Derivative of predicted loss along the budget curve, in log D.
double loss_slope(const LossSurfaceFit& fit, const BudgetRelation& relation, double c, double d) {
  const double n = relation(c, d);
  const double dn = relation.dn_dlogd(c, d);
  return -fit.alpha * fit.a_coef * std::pow(n, -fit.alpha - 1.0) * dn -
         fit.beta * fit.b_coef * std::pow(d, -fit.beta);
}

// Bisection for the sign change of the slope inside [lo, hi] (log D).
double refine_argmin(const LossSurfaceFit& fit, const BudgetRelation& relation, double c, double lo,
                     double hi) {
  if (!(loss_slope(fit, relation, c, std::exp(lo)) < 0 && loss_slope(fit, relation, c, std::exp(hi)) > 0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (loss_slope(fit, relation, c, std::exp(mid)) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double early_budget_relation(double c, double d) {
  if (!(c > 0 && d > 0)) raise(ErrorCode::kInvalidArgument, "budget needs C > 0 and D > 0", "c");
  return c / (6.0 * d);
}

double late_budget_relation(double c, double d, const VisionModel& vision, double vision_offset) {
  const double denom = 1.0 - vision_offset * vision.p;
  if (!(denom > 0)) {
    raise(ErrorCode::kSingularRelation, "1 - vision_offset * p must be positive", "vision_offset");
  }
  return (early_budget_relation(c, d) + vision_offset * vision.q) / denom;
}

VisionModel fit_vision_linear(std::span<const RunRecord> records) {
  std::vector<double> n, nv;
  for (const RunRecord& r : records) {
    if (r.arch() != Arch::kLate || !r.n_vision()) continue;
    n.push_back(r.n_total());
    nv.push_back(*r.n_vision());
  }
  if (std::set<double>(n.begin(), n.end()).size() < 2) {
    raise(ErrorCode::kTooFewPoints, "need late-fusion runs with at least 2 distinct n_total",
          "n_total");
  }
  const LinearFit lin = ordinary_least_squares(n, nv);
  return {lin.slope, lin.intercept};
}

double BudgetRelation::operator()(double c, double d) const {
  return kind == RelationKind::kEarly ? early_budget_relation(c, d)
                                      : late_budget_relation(c, d, vision, vision_offset);
}

double BudgetRelation::dn_dlogd(double c, double d) const {
  const double base = -early_budget_relation(c, d);
  return kind == RelationKind::kEarly ? base : base / (1.0 - vision_offset * vision.p);
}

void DGridConfig::validate() const {
  require(d_min >= 1 && std::isfinite(d_min), "d_min", "must be >= 1");
  require(d_max > d_min && std::isfinite(d_max), "d_max", "must exceed d_min");
  require(points >= 3, "points", "must be >= 3");
}

std::vector<double> DGridConfig::values() const {
  validate();
  std::vector<double> out(points);
  const double lo = std::log(d_min), hi = std::log(d_max);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = std::exp(lo + step * static_cast<double>(i));
  out.front() = d_min;
  out.back() = d_max;
  return out;
}

FrontierLaws closed_form_frontier(const LossSurfaceFit& fit, const FlopsRange& range) {
  const double alpha = fit.alpha, beta = fit.beta;
  if (!(alpha > 0 && beta > 0) || !std::isfinite(alpha + beta)) {
    raise(ErrorCode::kInvalidFit, "closed form needs alpha > 0 and beta > 0", "alpha");
  }
  if (!(range.c_min > 0 && range.c_max > range.c_min)) {
    raise(ErrorCode::kInvalidArgument, "flops range must satisfy 0 < c_min < c_max", "c_min");
  }
  const double a = beta / (alpha + beta);
  const double b = 1.0 - a;
  const double g = std::pow(alpha * fit.a_coef / (beta * fit.b_coef), 1.0 / (alpha + beta));

  FrontierLaws laws;
  laws.source = FrontierSource::kClosedForm;
  laws.n_of_c = {g * std::pow(6.0, -a), a, range.c_min, range.c_max, 1.0};
  laws.d_of_c = {std::pow(6.0, -b) / g, b, range.c_min, range.c_max, 1.0};
  laws.ratio_of_c = {g * g * std::pow(6.0, b - a), a - b, range.c_min, range.c_max, 1.0};
  laws.d_of_n = {std::pow(g, -1.0 / a), b / a, laws.n_of_c(range.c_min), laws.n_of_c(range.c_max),
                 1.0};
  validate(laws);
  return laws;
}

FrontierReport regress_frontier_report(const LossSurfaceFit& fit, const BudgetRelation& relation,
                                       std::span<const double> flops_values,
                                       const DGridConfig& grid, unsigned threads) {
  validate(fit);
  std::vector<double> cs(flops_values.begin(), flops_values.end());
  for (double c : cs) {
    if (!(c > 0 && std::isfinite(c))) raise(ErrorCode::kInvalidArgument, "FLOPs must be > 0", "flops");
  }
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  if (cs.size() < 2) raise(ErrorCode::kTooFewPoints, "need at least 2 distinct FLOPs values", "flops");
  const std::vector<double> ds = grid.values();

  FrontierReport report;
  report.optima.resize(cs.size());
  parallel_for(cs.size(), threads, [&](std::size_t i) {
    FrontierOptimum best;
    best.c = cs[i];
    best.loss = std::numeric_limits<double>::infinity();
    std::size_t best_j = ds.size();
    for (std::size_t j = 0; j < ds.size(); ++j) {
      const double n = relation(cs[i], ds[j]);
      if (!(n >= 1)) continue;
      const double loss = predict_loss(fit, n, ds[j]);
      if (loss < best.loss) {
        best.loss = loss;
        best.n = n;
        best.d = ds[j];
        best_j = j;
      }
    }
    best.at_boundary = best_j == 0 || best_j + 1 >= ds.size();
    if (grid.refine && !best.at_boundary) {
      const double x = refine_argmin(fit, relation, cs[i], std::log(ds[best_j - 1]), std::log(ds[best_j + 1]));
      if (std::isfinite(x)) {
        best.d = std::exp(x);
        best.n = relation(cs[i], best.d);
        best.loss = predict_loss(fit, best.n, best.d);
      }
    }
    report.optima[i] = best;
  });

  std::vector<double> c_in, n_in, d_in, ratio_in;
  for (const FrontierOptimum& o : report.optima) {
    if (o.at_boundary) continue;
    c_in.push_back(o.c);
    n_in.push_back(o.n);
    d_in.push_back(o.d);
    ratio_in.push_back(o.n / o.d);
  }
  if (std::set<double>(c_in.begin(), c_in.end()).size() < 2 ||
      std::set<double>(n_in.begin(), n_in.end()).size() < 2) {
    raise(ErrorCode::kDegenerateGrid,
          "optima fall on the D grid boundary for too many budgets; widen d_min/d_max", "d_grid");
  }
  report.laws.source = FrontierSource::kRegression;
  report.laws.n_of_c = fit_power_law(c_in, n_in);
  report.laws.d_of_c = fit_power_law(c_in, d_in);
  report.laws.d_of_n = fit_power_law(n_in, d_in);
  report.laws.ratio_of_c = fit_power_law(c_in, ratio_in);
  return report;
}

FrontierLaws regress_frontier(const LossSurfaceFit& fit, const BudgetRelation& relation,
                              std::span<const double> flops_values, const DGridConfig& grid,
                              unsigned threads) {
  return regress_frontier_report(fit, relation, flops_values, grid, threads).laws;
}

std::vector<double> run_flops_values(std::span<const RunRecord> runs) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const RunRecord& r : runs) out.push_back(run_flops(r));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace scalelab
