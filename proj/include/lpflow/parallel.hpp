#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace lpflow {

// Thread count from LPFLOW_THREADS, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n). Work is split into contiguous blocks; the
// first exception thrown by any worker is rethrown after the join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lpflow
