#pragma once

#include <cstddef>
#include <functional>

namespace longmem {

// Process-wide cap on worker threads used by the batch operations
// (per-scale, per-series and per-pair loops). 0 means hardware concurrency.
void set_max_threads(unsigned n) noexcept;
unsigned max_threads() noexcept;

/// Runs body(i) for i in [0, count). Each index is visited exactly once; the
/// body must only write to slots owned by its index, which keeps results
/// independent of scheduling. The first exception thrown by any body is
/// rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace longmem
