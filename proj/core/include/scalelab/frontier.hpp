// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scalelab/types.hpp"

namespace scalelab {

inline constexpr double kDefaultVisionOffset = 0.483;

// Least-squares line N_v = p * N_total + q.
struct VisionModel {
  double p = 0;
  double q = 0;

  bool operator==(const VisionModel&) const = default;
};

// N = C / (6 D).
double early_budget_relation(double c, double d);

// Solves N = C/(6D) + offset * N_v together with N_v = p * N + q.
// Throws kSingularRelation when 1 - offset * p <= 0.
double late_budget_relation(double c, double d, const VisionModel& vision,
                            double vision_offset = kDefaultVisionOffset);

// Fits N_v against N_total over late-fusion records. Records sharing the
// same model contribute one point per record.
VisionModel fit_vision_linear(std::span<const RunRecord> records);

enum class RelationKind { kEarly, kLate };

struct BudgetRelation {
  RelationKind kind = RelationKind::kEarly;
  VisionModel vision;
  double vision_offset = kDefaultVisionOffset;

  static BudgetRelation early() { return {}; }
  static BudgetRelation late(const VisionModel& vision, double offset = kDefaultVisionOffset) {
    return {RelationKind::kLate, vision, offset};
  }
  double operator()(double c, double d) const;
  // dN/d(log D) at fixed C.
  double dn_dlogd(double c, double d) const;
};

struct DGridConfig {
  double d_min = 1e10;
  double d_max = 6e11;
  std::size_t points = 200;
  // Polishes each interior grid argmin to the exact stationary point between
  // its neighbours. Off by default to match the plain grid search.
  bool refine = false;

  void validate() const;
  std::vector<double> values() const;  // log-spaced, endpoints included
};

// Range of C over which closed-form laws are reported.
struct FlopsRange {
  double c_min = 1e19;
  double c_max = 1e23;
};

// Exact minimizer of E + A N^-alpha + B (C/6N)^-beta. Throws kInvalidFit
// unless alpha > 0 and beta > 0.
FrontierLaws closed_form_frontier(const LossSurfaceFit& fit, const FlopsRange& range = {});

struct FrontierOptimum {
  double c = 0;
  double n = 0;
  double d = 0;
  double loss = 0;
  bool at_boundary = false;
};

struct FrontierReport {
  FrontierLaws laws;
  std::vector<FrontierOptimum> optima;  // one per distinct C, ascending
};

// Grid argmin of predicted loss per budget, followed by log-space OLS.
// Minima on the first or last grid point are excluded from the regression;
// kDegenerateGrid when fewer than two budgets remain.
FrontierReport regress_frontier_report(const LossSurfaceFit& fit, const BudgetRelation& relation,
                                       std::span<const double> flops_values,
                                       const DGridConfig& grid = {}, unsigned threads = 0);

FrontierLaws regress_frontier(const LossSurfaceFit& fit, const BudgetRelation& relation,
                              std::span<const double> flops_values, const DGridConfig& grid = {},
                              unsigned threads = 0);

// Sorted distinct training FLOPs of the given runs.
std::vector<double> run_flops_values(std::span<const RunRecord> runs);

}  // namespace scalelab
