#pragma once

#include <functional>

namespace multinex {

// Worker cap: min(MULTINEX_THREADS, hardware concurrency), at least 1.
// Read once; invalid or unset values fall back to the hardware count.
int thread_count();

// Runs fn(i) for i in [0, n), partitioned across at most thread_count()
// threads. fn must write only to slots owned by its own index, so results do
// not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace multinex
