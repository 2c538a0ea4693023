#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace equiterm {

// Worker cap: EQUITERM_THREADS if set to a positive integer, else the
// hardware concurrency.
unsigned worker_count();

// Calls body(i) for i in [0, n), spread over at most worker_count() threads.
// Each index is handled by exactly one thread; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace equiterm
