#pragma once

#include <cstddef>

namespace rrdps {

// Execution policy for the data-parallel kernels (sweep points, Monte Carlo
// trials, optimizer restarts, grid scans). Serial is the reference path;
// Parallel uses OpenMP when compiled in. Every kernel writes per-index slots
// and reduces in a fixed order, so both policies produce identical results.
enum class Exec { Serial, Parallel };

template <typename Body>
void for_each_index(std::size_t count, Exec exec, Body&& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < count; ++i) {
    body(i);
  }
}

}  // namespace rrdps
