#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ifbm::detail {

/// Splits [0, n) into `workers` contiguous chunks and runs body(begin, end)
/// on each. The first exception thrown by any chunk is rethrown.
template <typename Body>
void parallel_chunks(std::uint64_t n, unsigned workers, Body&& body) {
  if (workers <= 1 || n <= 1) {
    body(std::uint64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ifbm::detail
