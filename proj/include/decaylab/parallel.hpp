#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace decaylab {

// Every data-parallel kernel takes an Exec. `serial` is the reference path;
// both paths produce bitwise identical results because reductions are done
// over a fixed chunk decomposition that does not depend on the thread count.
enum class Exec { serial, parallel };

inline constexpr std::size_t kReduceChunks = 256;

void set_thread_count(int n);
int thread_count();

// An exception thrown by body(i) is rethrown after the loop; with several,
// the one from the smallest i wins, as in the serial path.
template <class F>
void parallel_for(std::size_t n, Exec exec, F&& body) {
  if (exec == Exec::parallel) {
    std::exception_ptr err;
    std::size_t err_index = n;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(decaylab_parallel_for_error)
        if (static_cast<std::size_t>(i) < err_index) {
          err_index = static_cast<std::size_t>(i);
          err = std::current_exception();
        }
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

// Sum of term(i) for i in [0, n). Chunk partials are accumulated left to right
// and then combined in chunk order, so the result does not depend on `exec`.
template <class F>
double chunked_sum(std::size_t n, Exec exec, F&& term) {
  if (n == 0) return 0.0;
  const std::size_t chunks = n < kReduceChunks ? n : kReduceChunks;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, exec, [&](std::size_t c) {
    const std::size_t lo = c * n / chunks;
    const std::size_t hi = (c + 1) * n / chunks;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace decaylab
