// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "scalelab/error.hpp"
#include "scalelab/specialization.hpp"

namespace scalelab {
namespace {

AssignmentTable one_layer(std::vector<ExpertCounts> cells) {
  const std::size_t e = cells.size();
  return AssignmentTable("t", 1, e, std::move(cells));
}

TEST(ExpertDistribution, Examples) {
  const AssignmentTable t = one_layer({{10, 0}, {5, 5}, {300, 100}, {0, 0}});
  EXPECT_EQ(expert_distribution(t, 0, 0), 1.0);
  EXPECT_EQ(expert_distribution(t, 0, 1), 0.5);
  EXPECT_EQ(expert_distribution(t, 0, 2), 0.75);
  try {
    expert_distribution(t, 0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyExpert);
  }
}

TEST(BinaryEntropy, Values) {
  EXPECT_EQ(binary_entropy(0), 0.0);
  EXPECT_EQ(binary_entropy(1), 0.0);
  EXPECT_EQ(binary_entropy(0.5), 1.0);
  EXPECT_NEAR(binary_entropy(0.25), -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75)), 1e-15);
}

TEST(EntropySpecialization, PureAndBalanced) {
  EXPECT_EQ(entropy_specialization(one_layer({{7, 0}, {0, 3}, {12, 0}}), 0), 1.0);
  EXPECT_EQ(entropy_specialization(one_layer({{4, 4}, {9, 9}}), 0), 0.0);
}

TEST(EntropySpecialization, HalfPureHalfBalanced) {
  std::vector<ExpertCounts> cells;
  for (int i = 0; i < 4; ++i) cells.push_back({10, 0});
  for (int i = 0; i < 4; ++i) cells.push_back({6, 6});
  EXPECT_EQ(entropy_specialization(one_layer(cells), 0), 0.5);
}

TEST(EntropySpecialization, ScaleAndPermutationInvariant) {
  std::vector<ExpertCounts> cells{{3, 1}, {10, 70}, {5, 5}, {0, 9}, {123, 4}};
  const double base = entropy_specialization(one_layer(cells), 0);
  std::vector<ExpertCounts> scaled;
  for (const ExpertCounts& c : cells) scaled.push_back({c.text_tokens * 1000, c.image_tokens * 1000});
  EXPECT_NEAR(entropy_specialization(one_layer(scaled), 0), base, 1e-12);
  std::sort(cells.begin(), cells.end(), [](auto a, auto b) { return a.text_tokens < b.text_tokens; });
  do {
    EXPECT_NEAR(entropy_specialization(one_layer(cells), 0), base, 1e-12);
  } while (std::next_permutation(cells.begin(), cells.end(),
                                 [](auto a, auto b) { return a.text_tokens < b.text_tokens; }));
}

TEST(EntropySpecialization, SkipsEmptyExperts) {
  EXPECT_EQ(entropy_specialization(one_layer({{0, 0}, {5, 0}}), 0), 1.0);
  try {
    entropy_specialization(one_layer({{0, 0}, {0, 0}}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllExpertsEmpty);
  }
}

// Brute force over cells: mean over both modalities and experts of
// |share - 1/E|.
double deviation_oracle(const std::vector<ExpertCounts>& cells) {
  double text = 0, image = 0;
  for (const ExpertCounts& c : cells) {
    text += c.text_tokens;
    image += c.image_tokens;
  }
  const double u = 1.0 / cells.size();
  double sum = 0;
  for (const ExpertCounts& c : cells) sum += std::abs(c.text_tokens / text - u) + std::abs(c.image_tokens / image - u);
  return sum / (2 * cells.size());
}

TEST(UniformDeviation, Examples) {
  EXPECT_EQ(uniform_deviation_specialization(one_layer({{5, 2}, {5, 2}, {5, 2}, {5, 2}}), 0), 0.0);
  EXPECT_EQ(uniform_deviation_specialization(one_layer({{9, 0}, {0, 4}}), 0), 0.5);
  std::vector<ExpertCounts> cells(8, ExpertCounts{0, 10});
  cells[0].text_tokens = 80;
  // Text: one share of 1 and seven of 0 against 1/8; image uniform.
  EXPECT_NEAR(uniform_deviation_specialization(one_layer(cells), 0), (7.0 / 8 + 7 * (1.0 / 8)) / 16, 1e-15);
  EXPECT_NEAR(uniform_deviation_specialization(one_layer(cells), 0), deviation_oracle(cells), 1e-15);
}

TEST(UniformDeviation, MatchesOracleAndBound) {
  const std::vector<std::vector<ExpertCounts>> cases{
      {{1, 2}, {3, 4}, {5, 6}}, {{100, 0}, {0, 100}, {1, 1}, {7, 3}}, {{9, 1}, {0, 5}}};
  for (const auto& cells : cases) {
    const double s = uniform_deviation_specialization(one_layer(cells), 0);
    EXPECT_NEAR(s, deviation_oracle(cells), 1e-15);
    EXPECT_LE(s, 1.0 - 1.0 / cells.size());
  }
  try {
    uniform_deviation_specialization(one_layer({{3, 0}, {4, 0}}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllExpertsEmpty);
  }
}

TEST(LayerScores, OnePerLayer) {
  const AssignmentTable t("src", 2, 2, {{4, 0}, {0, 4}, {2, 2}, {3, 3}});
  EXPECT_EQ(layer_scores(t, SpecializationMetric::kEntropy), (std::vector<double>{1.0, 0.0}));
  const auto uniform = layer_scores(t, SpecializationMetric::kUniform);
  ASSERT_EQ(uniform.size(), 2u);
  EXPECT_EQ(uniform[0], 0.5);
  // Text shares 0.4 and 0.6, image shares 0.4 and 0.6.
  EXPECT_NEAR(uniform[1], 0.1, 1e-15);
}

}  // namespace
}  // namespace scalelab
