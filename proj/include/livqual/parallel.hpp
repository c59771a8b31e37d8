#pragma once

#include <cstddef>
#include <functional>

namespace livqual {

/// Worker count: LIVQUAL_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)> &body);

} // namespace livqual
