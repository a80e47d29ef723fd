#pragma once

#include <cstddef>
#include <functional>

namespace qpdyn {

/// Number of worker threads used by parallel loops. Honors the
/// QPDYN_THREADS environment variable, defaults to hardware concurrency.
unsigned worker_count();

/// Runs fn(lo, hi) on disjoint contiguous ranges covering [0, count).
/// Work per index must not depend on the thread assignment; results are
/// deterministic because every output element is produced by exactly one
/// fixed-order loop.
void parallel_for_range(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qpdyn
