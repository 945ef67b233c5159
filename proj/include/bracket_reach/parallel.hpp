#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace bracket_reach {

/// Selects between the OpenMP kernels and their serial reference versions.
/// Both produce bitwise-identical results: work items write to their own
/// slot and any reduction happens afterwards in index order.
enum class Execution { kSerial, kParallel };

/// Runs body(i) for i in [0, n).  The first exception by index is rethrown
/// after all items finished.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int max_threads();

}  // namespace bracket_reach
