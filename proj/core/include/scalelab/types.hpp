// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalelab {

enum class Arch { kEarly, kLate, kMoeAgnostic, kMoeAware };
enum class EvalSet { kCaption, kInterleaved, kText, kAvg };

std::string_view to_string(Arch arch);
std::string_view to_string(EvalSet eval_set);
Arch parse_arch(std::string_view text);
EvalSet parse_eval_set(std::string_view text);
inline bool is_moe(Arch arch) { return arch == Arch::kMoeAgnostic || arch == Arch::kMoeAware; }

// Raw fields of one training run. Parameter and token counts are absolute
// (not billions) and held as doubles; every value below 2^53 is exact.
struct RunFields {
  std::string run_id;
  Arch arch = Arch::kEarly;
  double n_active = 0;
  double n_total = 0;
  std::optional<double> n_vision;
  double tokens = 0;
  std::optional<double> vision_token_fraction;
  std::string mixture;
  EvalSet eval_set = EvalSet::kAvg;
  double loss = 0;  // cross-entropy, nats

  bool operator==(const RunFields&) const = default;
};

// One observed (model, data, loss) point. Construction enforces the field
// invariants; an instance is always valid.
class RunRecord {
 public:
  explicit RunRecord(RunFields fields);

  const RunFields& fields() const noexcept { return fields_; }
  const std::string& run_id() const noexcept { return fields_.run_id; }
  Arch arch() const noexcept { return fields_.arch; }
  double n_active() const noexcept { return fields_.n_active; }
  double n_total() const noexcept { return fields_.n_total; }
  const std::optional<double>& n_vision() const noexcept { return fields_.n_vision; }
  double tokens() const noexcept { return fields_.tokens; }
  const std::optional<double>& vision_token_fraction() const noexcept {
    return fields_.vision_token_fraction;
  }
  const std::string& mixture() const noexcept { return fields_.mixture; }
  EvalSet eval_set() const noexcept { return fields_.eval_set; }
  double loss() const noexcept { return fields_.loss; }

  // 1 - active/total; lies in [0, 1).
  double sparsity() const noexcept { return 1.0 - fields_.n_active / fields_.n_total; }
  // Parameter count entering the loss surface: active parameters for MoE
  // runs, total parameters otherwise.
  double model_params() const noexcept {
    return is_moe(fields_.arch) ? fields_.n_active : fields_.n_total;
  }

  bool operator==(const RunRecord&) const = default;

 private:
  RunFields fields_;
};

/// Fitted L(N, D) = E + A / N^alpha + B / D^beta.
struct LossSurfaceFit {
  double e_irreducible = 0;
  double a_coef = 0;
  double b_coef = 0;
  double alpha = 0;
  double beta = 0;
  double objective = 0;        // summed Huber value at the optimum
  int winning_init_index = 0;  // position in the initialization grid
  bool converged = false;
  double huber_delta = 1e-3;

  bool operator==(const LossSurfaceFit&) const = default;
};

/// y = k * x^p, fitted (or derived) over [x_min, x_max].
struct PowerLawFit {
  double k = 1;
  double p = 0;
  double x_min = 0;
  double x_max = 1;
  double r_squared = 1;

  double operator()(double x) const;
  bool operator==(const PowerLawFit&) const = default;
};

enum class FrontierSource { kRegression, kClosedForm };
std::string_view to_string(FrontierSource source);
FrontierSource parse_frontier_source(std::string_view text);

// Compute-optimal allocation laws. n_of_c: N_opt(C), d_of_c: D_opt(C),
// d_of_n: D_opt(N_opt), ratio_of_c: N_opt/D_opt as a function of C.
struct FrontierLaws {
  PowerLawFit n_of_c;
  PowerLawFit d_of_c;
  PowerLawFit d_of_n;
  PowerLawFit ratio_of_c;
  FrontierSource source = FrontierSource::kRegression;

  bool operator==(const FrontierLaws&) const = default;
};

/// L(N, D, S) = E + A/N^alpha + B/D^beta + C/(1-S)^lambda + d/((1-S)^delta N^gamma).
struct SparseLossSurfaceFit {
  double e_irr = 0;
  double a_coef = 0;
  double b_coef = 0;
  double alpha = 0;
  double beta = 0;
  double lam = 0;
  double delta_s = 0;
  double gamma = 0;
  double c_coef = 0;
  double d_coef = 0;
  double objective = 0;
  bool converged = false;

  bool operator==(const SparseLossSurfaceFit&) const = default;
};

void validate(const LossSurfaceFit& fit);
void validate(const PowerLawFit& law);
void validate(const FrontierLaws& laws);
void validate(const SparseLossSurfaceFit& fit);

struct ExpertCounts {
  std::uint64_t text_tokens = 0;
  std::uint64_t image_tokens = 0;

  std::uint64_t total() const noexcept { return text_tokens + image_tokens; }
  bool operator==(const ExpertCounts&) const = default;
};

// Text/image token counts routed to each (layer, expert) cell.
class AssignmentTable {
 public:
  // `counts` is row-major over (layer, expert) and must hold exactly
  // num_layers * num_experts cells.
  AssignmentTable(std::string source, std::size_t num_layers, std::size_t num_experts,
                  std::vector<ExpertCounts> counts);

  const std::string& source() const noexcept { return source_; }
  std::size_t num_layers() const noexcept { return num_layers_; }
  std::size_t num_experts() const noexcept { return num_experts_; }
  const ExpertCounts& cell(std::size_t layer, std::size_t expert) const;
  std::span<const ExpertCounts> layer(std::size_t layer) const;

  bool operator==(const AssignmentTable&) const = default;

 private:
  std::string source_;
  std::size_t num_layers_;
  std::size_t num_experts_;
  std::vector<ExpertCounts> counts_;
};

struct GroupKey {
  Arch arch = Arch::kEarly;
  std::string mixture;
  EvalSet eval_set = EvalSet::kAvg;

  auto operator<=>(const GroupKey&) const = default;
};

// Validated collection of runs grouped by (arch, mixture, eval_set).
class Dataset {
 public:
  const std::vector<RunRecord>& records() const noexcept { return records_; }
  const std::map<GroupKey, std::vector<std::size_t>>& groups() const noexcept { return groups_; }
  std::vector<RunRecord> group(const GroupKey& key) const;
  std::size_t size() const noexcept { return records_.size(); }

 private:
  friend Dataset validate_dataset(std::vector<RunRecord> records);
  std::vector<RunRecord> records_;
  std::map<GroupKey, std::vector<std::size_t>> groups_;
};

// Rejects an empty list (kEmptyDataset) and repeated (run_id, eval_set)
// pairs (kDuplicateRun).
Dataset validate_dataset(std::vector<RunRecord> records);

}  // namespace scalelab
