#pragma once

#include <cstddef>
#include <functional>

namespace roughop {

/// Worker count used when callers pass 0: ROUGHOP_WORKERS, else hardware concurrency.
std::size_t default_workers();

/// Calls fn(chunk) for every chunk in [0, chunks) on up to `workers` threads.
/// Chunks must write disjoint outputs; results never depend on `workers`.
/// If any chunk throws, the exception of the lowest failing chunk is rethrown.
void parallel_for(std::size_t chunks, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace roughop
