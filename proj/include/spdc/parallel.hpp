#pragma once

#include <cstddef>
#include <functional>

namespace spdc {

/// Worker count from SPDC_THREADS (0 or unset = hardware concurrency).
int worker_count();

/// Runs body(i) for i in [0, n). Each index is independent, so results never
/// depend on the number of workers. Calls nested inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spdc
