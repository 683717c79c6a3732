#pragma once

#include <cstddef>
#include <functional>

namespace latentforge {

/// Runs body(i) for i in [0, count). With threads > 1 the indices are
/// distributed over a worker pool; each index must write only its own output
/// slot so results are identical for every thread count.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

/// Thread count from the LATENTFORGE_THREADS environment variable, or 1.
int default_thread_count();

}  // namespace latentforge
