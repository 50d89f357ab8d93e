#pragma once

#include <cstddef>
#include <functional>

namespace molforge {

// Worker count used when a caller passes 0.
std::size_t default_thread_count();

// Calls fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous chunks so results written by index do not depend on the count.
// The first exception thrown by any call is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace molforge
