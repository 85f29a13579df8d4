#pragma once

#include <cstddef>
#include <functional>

namespace slam3d {

/// Worker count: hardware concurrency, capped by the SLAM3D_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// handled exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace slam3d
