#pragma once

#include <cstddef>
#include <functional>

namespace macpp {

/// Worker count: hardware concurrency, capped by the MACPP_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads (0 = worker_count()).
/// Callers write results into slot i, so the outcome does not depend on
/// scheduling. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace macpp
