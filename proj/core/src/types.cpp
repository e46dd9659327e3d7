// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/types.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "scalelab/error.hpp"

namespace scalelab {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::kEarly: return "early";
    case Arch::kLate: return "late";
    case Arch::kMoeAgnostic: return "moe_agnostic";
    case Arch::kMoeAware: return "moe_aware";
  }
  return "early";
}

std::string_view to_string(EvalSet eval_set) {
  switch (eval_set) {
    case EvalSet::kCaption: return "caption";
    case EvalSet::kInterleaved: return "interleaved";
    case EvalSet::kText: return "text";
    case EvalSet::kAvg: return "avg";
  }
  return "avg";
}

Arch parse_arch(std::string_view text) {
  if (text == "early") return Arch::kEarly;
  if (text == "late") return Arch::kLate;
  if (text == "moe_agnostic" || text == "moe") return Arch::kMoeAgnostic;
  if (text == "moe_aware") return Arch::kMoeAware;
  raise(ErrorCode::kInvariantViolation, "arch: unknown architecture '" + std::string(text) + "'",
        "arch");
}

EvalSet parse_eval_set(std::string_view text) {
  if (text == "caption") return EvalSet::kCaption;
  if (text == "interleaved") return EvalSet::kInterleaved;
  if (text == "text") return EvalSet::kText;
  if (text == "avg") return EvalSet::kAvg;
  raise(ErrorCode::kInvariantViolation, "eval_set: unknown evaluation set '" + std::string(text) + "'",
        "eval_set");
}

std::string_view to_string(FrontierSource source) {
  return source == FrontierSource::kClosedForm ? "closed_form" : "regression";
}

FrontierSource parse_frontier_source(std::string_view text) {
  if (text == "closed_form") return FrontierSource::kClosedForm;
  if (text == "regression") return FrontierSource::kRegression;
  raise(ErrorCode::kInvariantViolation, "source: unknown frontier source '" + std::string(text) + "'",
        "source");
}

RunRecord::RunRecord(RunFields fields) : fields_(std::move(fields)) {
  const RunFields& f = fields_;
  require(!f.run_id.empty(), "run_id", "must not be empty");
  require(finite(f.n_active) && f.n_active >= 1, "n_active", "must be >= 1");
  require(finite(f.n_total) && f.n_total >= f.n_active, "n_total", "must be >= n_active");
  require(finite(f.tokens) && f.tokens >= 1, "tokens", "must be >= 1");
  require(finite(f.loss) && f.loss > 0, "loss", "must be > 0");
  if (f.arch == Arch::kLate) {
    require(f.n_vision.has_value(), "n_vision", "required for late-fusion runs");
  }
  if (f.n_vision) {
    require(finite(*f.n_vision) && *f.n_vision >= 1 && *f.n_vision < f.n_total, "n_vision",
            "must satisfy 1 <= n_vision < n_total");
  }
  if (f.vision_token_fraction) {
    const double v = *f.vision_token_fraction;
    require(finite(v) && v >= 0 && v <= 1, "vision_token_fraction", "must lie in [0, 1]");
  }
}

double PowerLawFit::operator()(double x) const { return k * std::pow(x, p); }

void validate(const LossSurfaceFit& fit) {
  require(finite(fit.e_irreducible) && fit.e_irreducible > 0, "e_irreducible", "must be > 0");
  require(finite(fit.a_coef) && fit.a_coef > 0, "a_coef", "must be > 0");
  require(finite(fit.b_coef) && fit.b_coef > 0, "b_coef", "must be > 0");
  require(finite(fit.alpha), "alpha", "must be finite");
  require(finite(fit.beta), "beta", "must be finite");
  require(finite(fit.objective) && fit.objective >= 0, "objective", "must be >= 0");
  require(finite(fit.huber_delta) && fit.huber_delta > 0, "huber_delta", "must be > 0");
}

void validate(const PowerLawFit& law) {
  require(finite(law.k) && law.k > 0, "k", "must be > 0");
  require(finite(law.p), "p", "must be finite");
  require(finite(law.x_min) && finite(law.x_max) && law.x_min < law.x_max, "x_min",
          "must be < x_max");
  require(!std::isnan(law.r_squared) && law.r_squared <= 1, "r_squared", "must be <= 1");
}

void validate(const FrontierLaws& laws) {
  validate(laws.n_of_c);
  validate(laws.d_of_c);
  validate(laws.d_of_n);
  validate(laws.ratio_of_c);
  if (laws.source == FrontierSource::kClosedForm) {
    require(laws.n_of_c.p + laws.d_of_c.p == 1.0, "n_of_c.p",
            "closed-form exponents must sum to 1");
  }
}

void validate(const SparseLossSurfaceFit& fit) {
  require(finite(fit.e_irr) && fit.e_irr > 0, "e_irr", "must be > 0");
  require(finite(fit.a_coef) && fit.a_coef > 0, "a_coef", "must be > 0");
  require(finite(fit.b_coef) && fit.b_coef > 0, "b_coef", "must be > 0");
  require(finite(fit.c_coef) && fit.c_coef > 0, "c_coef", "must be > 0");
  require(finite(fit.d_coef) && fit.d_coef > 0, "d_coef", "must be > 0");
  require(finite(fit.alpha), "alpha", "must be finite");
  require(finite(fit.beta), "beta", "must be finite");
  require(finite(fit.lam), "lam", "must be finite");
  require(finite(fit.delta_s), "delta_s", "must be finite");
  require(finite(fit.gamma), "gamma", "must be finite");
  require(finite(fit.objective) && fit.objective >= 0, "objective", "must be >= 0");
}

AssignmentTable::AssignmentTable(std::string source, std::size_t num_layers,
                                 std::size_t num_experts, std::vector<ExpertCounts> counts)
    : source_(std::move(source)),
      num_layers_(num_layers),
      num_experts_(num_experts),
      counts_(std::move(counts)) {
  require(num_layers_ > 0, "num_layers", "must be > 0");
  require(num_experts_ > 0, "num_experts", "must be > 0");
  require(counts_.size() == num_layers_ * num_experts_, "counts",
          "every (layer, expert) cell must be present");
}

const ExpertCounts& AssignmentTable::cell(std::size_t layer, std::size_t expert) const {
  if (layer >= num_layers_ || expert >= num_experts_) {
    raise(ErrorCode::kInvalidArgument, "assignment cell out of range", "layer");
  }
  return counts_[layer * num_experts_ + expert];
}

std::span<const ExpertCounts> AssignmentTable::layer(std::size_t layer) const {
  if (layer >= num_layers_) raise(ErrorCode::kInvalidArgument, "layer out of range", "layer");
  return std::span<const ExpertCounts>(counts_).subspan(layer * num_experts_, num_experts_);
}

std::vector<RunRecord> Dataset::group(const GroupKey& key) const {
  std::vector<RunRecord> out;
  if (auto it = groups_.find(key); it != groups_.end()) {
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(records_[i]);
  }
  return out;
}

Dataset validate_dataset(std::vector<RunRecord> records) {
  if (records.empty()) raise(ErrorCode::kEmptyDataset, "dataset has no runs");
  std::set<std::pair<std::string, EvalSet>> seen;
  Dataset out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunRecord& r = records[i];
    if (!seen.emplace(r.run_id(), r.eval_set()).second) {
      raise(ErrorCode::kDuplicateRun,
            "duplicate run '" + r.run_id() + "' for eval set " + std::string(to_string(r.eval_set())),
            r.run_id());
    }
    out.groups_[GroupKey{r.arch(), r.mixture(), r.eval_set()}].push_back(i);
  }
  out.records_ = std::move(records);
  return out;
}

}  // namespace scalelab
