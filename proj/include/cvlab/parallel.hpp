#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace cvlab {

// Serial is the reference path; Parallel must produce bitwise identical
// results, which holds because every index is computed independently and all
// reductions happen afterwards in index order.
enum class ExecPolicy { Serial, Parallel };

template <class Fn>
void parallel_for(ExecPolicy policy, std::size_t count, Fn&& fn) {
  if (policy == ExecPolicy::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cvlab
