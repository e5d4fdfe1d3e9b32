#pragma once

#include <cstddef>
#include <functional>

namespace proa {

/// Runs fn(i) for i in [0, n) over up to `workers` threads (0 or 1 runs
/// inline). The first exception thrown by any task is rethrown after every
/// thread has joined.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace proa
