#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace slowman {

/// Selects how per-slice loops run. `serial` is the reference path; `parallel`
/// distributes independent slices over OpenMP threads. Both write results into
/// preallocated slots, so outputs are bitwise identical.
enum class ExecutionPolicy { serial, parallel };

/// Runs `body(i)` for i in [0, count). The first exception (lowest index) is
/// rethrown after the loop so serial and parallel runs fail identically.
template <class Body>
void for_each_slice(std::size_t count, ExecutionPolicy policy, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) if (policy == ExecutionPolicy::parallel)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace slowman
