#pragma once

#include <cstddef>
#include <functional>

namespace unifilter {

/// Worker cap: UNIFILTER_THREADS if set and positive, otherwise hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across up to `workers` threads in
/// contiguous blocks. Work items must write disjoint outputs; results are then
/// independent of the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace unifilter
