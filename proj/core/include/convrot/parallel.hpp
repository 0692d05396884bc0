#pragma once

#include <cstddef>
#include <functional>

namespace convrot {

// Number of worker threads: CONVROT_THREADS if set (0 = hardware
// concurrency), else 1. Read once per process.
unsigned thread_count();

// Runs fn(i) for i in [0, count), split into contiguous chunks across the
// configured threads. Each index is processed by exactly one thread, so any
// per-index computation with a fixed internal order is bit-exact regardless
// of the split.
void parallel_for(size_t count, const std::function<void(size_t)>& fn);

}  // namespace convrot
