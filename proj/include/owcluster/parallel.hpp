#pragma once

#include <cstddef>
#include <functional>

namespace owcluster {

// Worker count: OWCLUSTER_THREADS when set and non-zero, otherwise the
// hardware concurrency.
std::size_t thread_limit();

// Runs body(i) for i in [0, count). Each index must write only its own
// output slot so results never depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace owcluster
