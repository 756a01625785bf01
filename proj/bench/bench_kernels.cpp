// Serial reference kernels against their OpenMP versions. Thread count is
// the benchmark argument for the omp variants.

#include <benchmark/benchmark.h>

#include "rpz/kernels.hpp"
#include "rpz/parallel.hpp"
#include "rpz/roots.hpp"

using namespace rpz;

namespace {

std::vector<cplx> random_points(int n, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<cplx> z(n);
    for (int i = 0; i < n; ++i) z[i] = {rng.normal(i, 0), rng.normal(i, 1)};
    return z;
}

void BM_spike_serial(benchmark::State& st) {
    const auto d = make_distribution("log_intermediate");
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::spike_count(d, 1000000, 1.0, 7));
    st.SetItemsProcessed(st.iterations() * 1000000);
}

void BM_spike_omp(benchmark::State& st) {
    set_workers(static_cast<int>(st.range(0)));
    const auto d = make_distribution("log_intermediate");
    for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::spike_count(d, 1000000, 1.0, 7));
    st.SetItemsProcessed(st.iterations() * 1000000);
}

void BM_potential_serial(benchmark::State& st) {
    const auto pts = random_points(256, 1);
    const auto grid = random_points(10201, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::empirical_potential(pts, grid));
}

void BM_potential_omp(benchmark::State& st) {
    set_workers(static_cast<int>(st.range(0)));
    const auto pts = random_points(256, 1);
    const auto grid = random_points(10201, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::empirical_potential(pts, grid));
}

void BM_sublevel_serial(benchmark::State& st) {
    const auto roots = random_points(50, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::sublevel_hits(roots, -30.0, 5.0, 100000, 4));
}

void BM_sublevel_omp(benchmark::State& st) {
    set_workers(static_cast<int>(st.range(0)));
    const auto roots = random_points(50, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::sublevel_hits(roots, -30.0, 5.0, 100000, 4));
}

void BM_roots_aberth(benchmark::State& st) {
    const auto c = random_points(static_cast<int>(st.range(0)) + 1, 5);
    for (auto _ : st) benchmark::DoNotOptimize(roots(std::span<const cplx>(c)));
}

}  // namespace

BENCHMARK(BM_spike_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spike_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_potential_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_potential_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sublevel_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sublevel_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_roots_aberth)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
