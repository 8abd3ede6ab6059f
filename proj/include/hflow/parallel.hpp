#pragma once

#include <exception>
#include <string>
#include <vector>

namespace hflow {

/// Runs body(i) for i in [0, n) on the OpenMP pool. Results must be written to
/// per-index slots so the outcome does not depend on scheduling. Exceptions are
/// collected per index; the one with the lowest index is rethrown.
template <typename Body>
void parallel_for(int n, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

} // namespace hflow
