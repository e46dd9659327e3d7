// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "scalelab/types.hpp"

namespace scalelab {

// Text share p of one (layer, expert) cell. kEmptyExpert when it saw no
// tokens.
double expert_distribution(const AssignmentTable& table, std::size_t layer, std::size_t expert);

// Base-2 binary entropy, with H(0) = H(1) = 0.
double binary_entropy(double p);

// Mean of 1 - H(p) over experts of a layer that received tokens.
double entropy_specialization(const AssignmentTable& table, std::size_t layer);

// Mean over both modalities and all experts of |share - 1/num_experts|,
// where share is the expert's fraction of that modality's tokens.
double uniform_deviation_specialization(const AssignmentTable& table, std::size_t layer);

enum class SpecializationMetric { kEntropy, kUniform };

// One score per layer, in layer order.
std::vector<double> layer_scores(const AssignmentTable& table, SpecializationMetric metric);

}  // namespace scalelab
