#pragma once

#include <cstddef>
#include <functional>

namespace slcp {

// Worker cap used by the library's parallel loops. Defaults to the
// SLCP_THREADS environment variable when set, else hardware concurrency.
int ThreadCount();
void SetThreadCount(int threads);

// Runs body(i) for every i in [0, count). Each index is executed exactly once;
// callers write results into per-index slots and reduce in index order, so the
// outcome does not depend on the worker count. The exception raised by the
// lowest failing index is rethrown after all workers join.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace slcp
