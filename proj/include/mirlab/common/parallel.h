#pragma once

#include <cstddef>
#include <functional>

namespace mirlab {

// Worker count: hardware concurrency, capped by MIRLAB_THREADS when set.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
// processed exactly once; callers write results into slot i so the output is
// independent of scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mirlab
