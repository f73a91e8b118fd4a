#pragma once

#include <cstddef>
#include <functional>

namespace hmmdiv {

// Worker count from HMMDIV_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index is executed exactly once; the
// first exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hmmdiv
