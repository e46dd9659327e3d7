// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace scalelab {

// std::thread::hardware_concurrency(), at least 1.
unsigned hardware_threads();

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = all
// hardware threads). Work is claimed dynamically, so callers must write
// results into per-index slots. If any call throws, the exception from the
// lowest index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace scalelab
