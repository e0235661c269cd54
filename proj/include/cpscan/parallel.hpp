#pragma once

#include <functional>

#include "cpscan/types.hpp"

namespace cpscan {

/// Worker count: CPSCAN_THREADS when set and positive, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically; callers write results into pre-sized slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers have joined.
void parallel_for(Index count, const std::function<void(Index)>& body, int threads = worker_count());

}  // namespace cpscan
