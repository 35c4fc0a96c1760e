#pragma once

#include <cstddef>
#include <functional>

namespace depthforge {

// Global worker count used by parallel_for. 1 = run inline.
void set_jobs(int jobs);
int jobs();

// Runs fn(begin, end) over contiguous chunks of [0, n). Work is partitioned
// statically and every output element is owned by exactly one chunk, so
// results are bit-identical for any worker count. Nested calls run inline.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

// Convenience per-index form.
void parallel_for_each(size_t n, const std::function<void(size_t)>& fn);

}  // namespace depthforge
