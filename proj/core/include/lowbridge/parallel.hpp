#pragma once

#include <cstdint>
#include <functional>

namespace lowbridge {

// Worker count: LOWBRIDGE_THREADS env var if set (>=1), otherwise the
// hardware concurrency. Evaluated once per process.
int worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks so
// results are identical for any worker count; fn must write only to
// per-index outputs. Runs inline when n is small or one worker is available.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

} // namespace lowbridge
