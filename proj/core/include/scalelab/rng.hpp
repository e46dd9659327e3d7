// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace scalelab {

// SplitMix64 (Steele, Lea, Flood 2014). Used to expand seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  std::uint64_t next() noexcept;

 private:
  std::uint64_t state_;
};

// xoshiro256** 1.0 (Blackman, Vigna). Output is identical on every
// platform; the distributions below avoid the unspecified std ones.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept;
  // Independent stream for (seed, stream) pairs.
  Xoshiro256(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next() noexcept;
  // Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept;
  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal by the Box-Muller transform.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace scalelab
