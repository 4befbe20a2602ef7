#pragma once

#include <cstddef>
#include <functional>

namespace spdkit {

// Worker count for per-sample loops. Defaults to SPDKIT_THREADS when set,
// otherwise the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n) over contiguous blocks. Each index must write
/// only its own output slot; callers reduce afterwards in index order, so
/// results do not depend on the worker count. If any call throws, the
/// exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spdkit
