#pragma once

#include <cstddef>
#include <functional>

namespace qtangent {

/// Runs body(i, worker) for i in [0, n) on `threads` workers (0 = hardware
/// concurrency). Work items are claimed dynamically; callers must not depend
/// on which worker handles which item.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, int)>& body);

int resolve_threads(int threads);

}  // namespace qtangent
