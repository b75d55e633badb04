#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blowlab {

// Every data-parallel kernel in this project comes in two flavours selected
// at run time: a plain serial loop (the reference) and an OpenMP loop.
// Kernels are written so that both flavours produce bit-identical results
// (independent per-index work, order-independent aggregation).
enum class Exec { Serial, OpenMP };

template <class Body>
void parallel_for(std::int64_t n, Exec exec, Body&& body)
{
#ifdef _OPENMP
    if (exec == Exec::OpenMP) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)exec;
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace blowlab
