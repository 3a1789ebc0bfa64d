#pragma once

#include <cstddef>
#include <functional>

namespace termspace {

/// Worker count: TERMSPACE_THREADS if set and positive, otherwise the
/// hardware concurrency. Read on every call.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over thread_count() workers. Work is split
/// into contiguous blocks, so callers that write to slot i get results that do
/// not depend on the worker count. The first exception (lowest i) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace termspace
