#pragma once

#include <cstddef>
#include <functional>

namespace frodo {

/// Worker count from FRODO_THREADS: unset, empty or 0 means
/// hardware_concurrency(). Throws InvalidArgument on a malformed value.
std::size_t configured_threads();

/// Calls body(i) for every i in [0, count) on up to `threads` workers. Each
/// index is handled exactly once; the first exception thrown is rethrown
/// after all workers finish. Results written by index keep input order.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace frodo
