#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace uowq::parallel {

// Fixed reduction block. Partial sums are formed per block and folded in block order,
// so reductions are bit-identical for any thread count.
inline constexpr std::size_t kBlockSize = 256;

void set_threads(int threads);
int max_threads();

inline std::size_t block_count(std::size_t n) { return (n + kBlockSize - 1) / kBlockSize; }

// Runs body(i) for i in [0, count) across OpenMP threads. An exception thrown by any
// iteration is rethrown on the calling thread; when several fail, the lowest index wins so
// the reported error is independent of scheduling.
template <class Body>
void for_each_index(std::size_t count, Body&& body) {
  std::vector<std::exception_ptr> errors;
  std::int64_t first_error = -1;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(uowq_parallel_error)
      {
        if (first_error < 0 || i < first_error) {
          first_error = i;
          errors.assign(1, std::current_exception());
        }
      }
    }
  }
  if (!errors.empty()) std::rethrow_exception(errors.front());
}

}  // namespace uowq::parallel
