#pragma once

#include <cstddef>
#include <functional>

namespace dimest::harness {

// Worker count: DIMEST_THREADS if set and positive, else hardware concurrency (at least 1).
unsigned worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. Callers write results into
// slot i, so output order never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned workers = 0);

}  // namespace dimest::harness
