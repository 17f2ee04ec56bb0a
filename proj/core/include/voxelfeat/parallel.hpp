#pragma once

#include <cstddef>
#include <functional>

namespace voxelfeat {

/// Number of worker threads to use when the caller asks for `requested`.
/// Values below 1 mean "all hardware threads".
int resolve_thread_count(int requested);

/// Splits [0, count) into at most `threads` contiguous chunks and runs
/// `body(begin, end)` for each, one chunk per thread. Chunk boundaries
/// depend only on `count` and the thread count. Exceptions thrown by a
/// chunk are rethrown on the calling thread.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace voxelfeat
