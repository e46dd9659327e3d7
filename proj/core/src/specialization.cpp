// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/specialization.hpp"

#include <cmath>
#include <string>

#include "scalelab/error.hpp"

namespace scalelab {

namespace {

void check_layer(const AssignmentTable& table, std::size_t layer) {
  if (layer >= table.num_layers()) {
    raise(ErrorCode::kInvalidArgument, "layer " + std::to_string(layer) + " does not exist", "layer");
  }
}

}  // namespace

double expert_distribution(const AssignmentTable& table, std::size_t layer, std::size_t expert) {
  const ExpertCounts& cell = table.cell(layer, expert);
  if (cell.total() == 0) {
    raise(ErrorCode::kEmptyExpert,
          "expert " + std::to_string(expert) + " in layer " + std::to_string(layer) + " has no tokens",
          "expert");
  }
  return static_cast<double>(cell.text_tokens) / static_cast<double>(cell.total());
}

double binary_entropy(double p) {
  if (p <= 0 || p >= 1) return 0;
  return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
}

double entropy_specialization(const AssignmentTable& table, std::size_t layer) {
  check_layer(table, layer);
  double sum = 0;
  std::size_t used = 0;
  for (std::size_t e = 0; e < table.num_experts(); ++e) {
    if (table.cell(layer, e).total() == 0) continue;
    sum += 1.0 - binary_entropy(expert_distribution(table, layer, e));
    ++used;
  }
  if (used == 0) raise(ErrorCode::kAllExpertsEmpty, "every expert in the layer is empty", "layer");
  return sum / static_cast<double>(used);
}

double uniform_deviation_specialization(const AssignmentTable& table, std::size_t layer) {
  check_layer(table, layer);
  const auto cells = table.layer(layer);
  double text_total = 0, image_total = 0;
  for (const ExpertCounts& c : cells) {
    text_total += static_cast<double>(c.text_tokens);
    image_total += static_cast<double>(c.image_tokens);
  }
  if (text_total == 0 || image_total == 0) {
    raise(ErrorCode::kAllExpertsEmpty, "a modality has no tokens in the layer", "layer");
  }
  const double uniform = 1.0 / static_cast<double>(table.num_experts());
  double sum = 0;
  for (const ExpertCounts& c : cells) {
    sum += std::abs(static_cast<double>(c.text_tokens) / text_total - uniform);
    sum += std::abs(static_cast<double>(c.image_tokens) / image_total - uniform);
  }
  return sum / (2.0 * static_cast<double>(table.num_experts()));
}

std::vector<double> layer_scores(const AssignmentTable& table, SpecializationMetric metric) {
  std::vector<double> out;
  out.reserve(table.num_layers());
  for (std::size_t l = 0; l < table.num_layers(); ++l) {
    out.push_back(metric == SpecializationMetric::kEntropy ? entropy_specialization(table, l)
                                                           : uniform_deviation_specialization(table, l));
  }
  return out;
}

}  // namespace scalelab
