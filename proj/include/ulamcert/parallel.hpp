#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ulamcert {

/// Worker count: ULAMCERT_THREADS when set, otherwise hardware concurrency.
unsigned worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on worker threads.
/// The first exception thrown by any chunk is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ulamcert
