#pragma once

#include <cstddef>
#include <functional>

namespace mrtg {

// Worker count used by parallel kernels. Defaults to MRTG_THREADS if set,
// otherwise std::thread::hardware_concurrency().
unsigned thread_count();
void set_thread_count(unsigned n);  // 0 restores the default

/// Splits [0, n) into contiguous chunks whose boundaries are multiples of
/// `grain` and runs body(begin, end) on each, possibly concurrently.
/// Chunks never overlap, so bodies writing disjoint 64-bit words are race-free
/// when grain is a multiple of 64.
void parallel_for(std::size_t n, std::size_t grain, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mrtg
