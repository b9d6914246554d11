#pragma once

#include <cstddef>
#include <functional>

namespace jsct {

// Process-wide worker count used by the ray and voxel loops. Defaults to 1.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls body(begin, end) on contiguous, disjoint chunks covering [0, n).
// Chunks run concurrently when thread_count() > 1; every element is touched
// by exactly one call, so elementwise maps stay deterministic.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace jsct
