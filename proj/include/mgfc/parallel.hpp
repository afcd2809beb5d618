#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mgfc {

// Execution mode for the data-parallel kernels. Serial is the reference
// implementation used by the tests and the benchmark; Parallel dispatches
// to OpenMP when available and falls back to the serial loop otherwise.
enum class ExecMode { Serial, Parallel };

namespace par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Index-parallel loop. Each index must write to disjoint state so that the
// serial and parallel paths produce bitwise-identical results.
template <typename F>
void for_index(std::ptrdiff_t n, ExecMode mode, F&& body) {
#ifdef _OPENMP
  if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)mode;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

}  // namespace par
}  // namespace mgfc
