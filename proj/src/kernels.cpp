#include "rpz/kernels.hpp"

#include "rpz/parallel.hpp"

namespace rpz::kernels {

namespace serial {

std::uint64_t spike_count(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::uint64_t count = 0;
    for (std::uint64_t n = 1; n <= N; ++n)
        if (dist.sample_log_abs(rng, n) > eps * static_cast<double>(n)) ++count;
    return count;
}

std::vector<double> empirical_potential(std::span<const cplx> points, std::span<const cplx> grid) {
    std::vector<double> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) out[g] = potential_at(points, grid[g]);
    return out;
}

std::uint64_t sublevel_hits(std::span<const cplx> roots, double log_level, double radius, std::uint64_t samples,
                            std::uint64_t seed) {
    const CounterRng rng(seed);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i)
        if (log_abs_monic(roots, disk_sample(rng, i, radius)) <= log_level) ++hits;
    return hits;
}

}  // namespace serial

namespace omp {

std::uint64_t spike_count(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::uint64_t count = 0;
    const long long last = static_cast<long long>(N);
#pragma omp parallel for reduction(+ : count) schedule(static) num_threads(workers())
    for (long long n = 1; n <= last; ++n)
        if (dist.sample_log_abs(rng, static_cast<std::uint64_t>(n)) > eps * static_cast<double>(n)) ++count;
    return count;
}

std::vector<double> empirical_potential(std::span<const cplx> points, std::span<const cplx> grid) {
    std::vector<double> out(grid.size());
    const long long m = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static) num_threads(workers())
    for (long long g = 0; g < m; ++g) out[g] = potential_at(points, grid[g]);
    return out;
}

std::uint64_t sublevel_hits(std::span<const cplx> roots, double log_level, double radius, std::uint64_t samples,
                            std::uint64_t seed) {
    const CounterRng rng(seed);
    std::uint64_t hits = 0;
    const long long m = static_cast<long long>(samples);
#pragma omp parallel for reduction(+ : hits) schedule(static) num_threads(workers())
    for (long long i = 0; i < m; ++i)
        if (log_abs_monic(roots, disk_sample(rng, static_cast<std::uint64_t>(i), radius)) <= log_level) ++hits;
    return hits;
}

}  // namespace omp

}  // namespace rpz::kernels
