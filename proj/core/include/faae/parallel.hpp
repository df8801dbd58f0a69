#pragma once

#include <cstddef>
#include <functional>

namespace faae {

/// Runs fn(0..n-1) across up to `threads` worker threads. Work items must be
/// independent; the first exception thrown by any item is rethrown on the
/// caller's thread after all workers finish. threads <= 1 runs inline.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace faae
