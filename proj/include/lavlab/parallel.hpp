#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

// Data-parallel kernels run as OpenMP loops over independent work items that
// write to disjoint slots; reductions happen afterwards in fixed index order,
// so results are bit-identical for any thread count. Exec::Serial is the
// reference path used by the tests and the benchmark.

namespace lavlab::par {

enum class Exec { Serial, Parallel };

/// Worker cap: LAVLAB_THREADS env var, 0 or unset = OpenMP default.
int max_threads();

/// Override the cap programmatically (0 = auto). Used by the CLI.
void set_threads(int n);

template <class F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
#ifdef _OPENMP
    if (exec == Exec::Parallel && n > 1 && max_threads() != 1) {
        const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt > 0 ? nt : omp_get_max_threads())
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            f(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)exec;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace lavlab::par
