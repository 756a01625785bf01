#include <doctest.h>

#include "rpz/kernels.hpp"
#include "rpz/parallel.hpp"

using namespace rpz;

namespace {

struct WorkerGuard {
    int saved = workers();
    ~WorkerGuard() { set_workers(saved); }
};

}  // namespace

TEST_CASE("serial and OpenMP kernels agree exactly") {
    WorkerGuard guard;
    const auto d = make_distribution("log_heavy");
    const CounterRng rng(6);
    std::vector<cplx> pts, grid;
    for (int i = 0; i < 300; ++i) pts.push_back({rng.normal(i, 0), rng.normal(i, 1)});
    grid = exterior_grid(Support::circle(3.0));
    grid.push_back(pts[7]);
    for (int w : {1, 4, 8}) {
        set_workers(w);
        CHECK(kernels::omp::spike_count(d, 200000, 1.0, 5) == kernels::serial::spike_count(d, 200000, 1.0, 5));
        const auto a = kernels::omp::empirical_potential(pts, grid);
        const auto b = kernels::serial::empirical_potential(pts, grid);
        CHECK(a == b);
        CHECK(std::isinf(a.back()));
        CHECK(kernels::omp::sublevel_hits(pts, 250.0, 4.0, 50000, 9) ==
              kernels::serial::sublevel_hits(pts, 250.0, 4.0, 50000, 9));
    }
}

TEST_CASE("disk samples are uniform in the disk") {
    const CounterRng rng(12);
    int inner = 0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const cplx z = kernels::disk_sample(rng, i, 2.0);
        CHECK(std::abs(z) <= 2.0);
        if (std::abs(z) < 1.0) ++inner;
    }
    CHECK(std::abs(inner / double(m) - 0.25) < 0.005);
}

TEST_CASE("set_workers is honored") {
    WorkerGuard guard;
    set_workers(3);
    CHECK(workers() == 3);
}
