#ifndef CRT_PARALLEL_HPP
#define CRT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace crt {

/// Worker count used by the operator kernels; 0 means hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Runs body(begin, end) over a static partition of [0, n).
/// Each index is handled by exactly one call, so per-index results do not
/// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace crt

#endif
