#pragma once

#include <cstddef>

namespace rpz {

/// Worker count used by the OpenMP kernels. Defaults to the OpenMP runtime
/// setting; the CLI reads RPZ_WORKERS.
int workers();
void set_workers(int count);

/// fn(i) for i in [0, count), results must be stored by index.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
    const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(workers())
    for (long long i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

template <class F>
void serial_for(std::size_t count, F&& fn) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace rpz
