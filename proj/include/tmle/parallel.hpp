#pragma once

#include <cstddef>
#include <functional>

namespace tmle {

// Worker count: TMLE_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t thread_count();

// Runs body(block) for block in [0, num_blocks) on up to thread_count()
// threads. Callers that reduce results must store per-block partials and
// combine them in block order; block boundaries must not depend on the
// thread count, which makes reductions bit-reproducible.
void parallel_blocks(std::size_t num_blocks, const std::function<void(std::size_t)>& body);

}  // namespace tmle
