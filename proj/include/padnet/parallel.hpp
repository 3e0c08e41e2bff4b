#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace padnet {

// Serial runs in index order and is the reference the parallel kernels are
// tested against; both must give identical results.
enum class Execution { Serial, Parallel };

int hardware_threads() noexcept;

/**
   Runs body(i) for i in [0, count). Exceptions thrown by body are collected
   and the one with the lowest index is rethrown after the loop, so error
   reporting does not depend on scheduling.
 */
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto signed_count = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < signed_count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
}

}  // namespace padnet
