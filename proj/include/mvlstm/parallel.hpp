#pragma once

#include <cstddef>
#include <functional>

namespace mvlstm {

// Number of workers to use for `requested` (0 = hardware concurrency).
std::size_t resolve_threads(std::size_t requested);

// Runs fn(i) for i in [0, count) across at most `threads` workers with a
// static block partition. Each index is visited exactly once; callers that
// need deterministic reductions must write into per-index slots and reduce
// sequentially afterwards.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mvlstm
