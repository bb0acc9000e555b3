#pragma once

#include <functional>

namespace ckn {

/// Worker count from CKN_LAB_JOBS, else 1.
int default_jobs();

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Results must be written to
/// per-index slots, so output order does not depend on scheduling. The first exception
/// (lowest index) is rethrown after all workers finish.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

}  // namespace ckn
