// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scalelab/types.hpp"

namespace scalelab {

enum class RunFormat { kCsv, kJson };

// Column order written by save_runs_csv; "figure" is optional on input.
inline constexpr std::string_view kRunCsvHeader =
    "run_id,arch,n_active,n_total,n_vision,tokens,vision_token_fraction,mixture,eval_set,loss,figure";

struct RunCsvOptions {
  bool require_figure = false;  // fixtures must name their source figure
  std::string origin = "<input>";
};

// Parses run CSV text. Empty cells mean an absent optional field. Errors
// carry "origin:line:column". Does not check for duplicates.
std::vector<RunRecord> parse_runs_csv(std::string_view text, const RunCsvOptions& options = {});

// JSON array of objects keyed by the CSV column names.
std::vector<RunRecord> parse_runs_json(std::string_view text, std::string_view origin = "<input>");

// Reads and validates a run file. The format defaults to the extension
// (.json or anything else as CSV). Throws kEmptyDataset for no rows and
// kDuplicateRun for repeated (run_id, eval_set).
std::vector<RunRecord> load_runs(const std::filesystem::path& path,
                                 std::optional<RunFormat> format = std::nullopt);

// load_runs for bundled fixtures: every row must carry a figure label.
std::vector<RunRecord> load_fixture(const std::filesystem::path& path);

std::string runs_to_csv(std::span<const RunRecord> runs);

inline constexpr std::string_view kFitSchema = "scalelab.fit.v1";

using FitDocument = std::variant<LossSurfaceFit, SparseLossSurfaceFit, FrontierLaws, PowerLawFit>;

// Versioned JSON with "schema" and "kind" fields; doubles keep full
// precision so parsing the output reproduces the input exactly.
std::string fit_to_json(const FitDocument& fit);
FitDocument fit_from_json(std::string_view text);

void save_fit(const FitDocument& fit, const std::filesystem::path& path);
FitDocument load_fit(const std::filesystem::path& path);

// load_fit that also checks the document kind (kSchemaMismatch otherwise).
template <class T>
T load_fit_as(const std::filesystem::path& path);

// CSV with columns layer,expert,text_tokens,image_tokens,source. One table
// per source, in order of first appearance.
std::vector<AssignmentTable> parse_assignments_csv(std::string_view text,
                                                   std::string_view origin = "<input>");
std::vector<AssignmentTable> load_assignments(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace scalelab
