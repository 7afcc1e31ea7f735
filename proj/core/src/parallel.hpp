#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <execution>
#include <mutex>
#include <numeric>
#include <vector>

namespace ranklab::detail {

// Runs body(i) for i in [0, count) in parallel. If any call throws, the
// exception from the smallest failing index is rethrown, so failures are as
// deterministic as the results.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mutex mutex;
  std::size_t first_bad = count;
  std::exception_ptr error;
  std::for_each(std::execution::par, idx.begin(), idx.end(), [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(mutex);
      if (i < first_bad) {
        first_bad = i;
        error = std::current_exception();
      }
    }
  });
  if (error) std::rethrow_exception(error);
}

}  // namespace ranklab::detail
