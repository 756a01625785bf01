#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both must return
// identical results (integer reductions, per-index outputs).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "rpz/ensembles.hpp"
#include "rpz/support.hpp"

namespace rpz::kernels {

namespace serial {

std::uint64_t spike_count(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed);

/// -(1/D) sum log|z - x_i| at every grid point (+inf when z hits a point).
std::vector<double> empirical_potential(std::span<const cplx> points, std::span<const cplx> grid);

/// Number of uniform samples in the disk |z| < radius with sum log|z - r_i| <= log_level.
std::uint64_t sublevel_hits(std::span<const cplx> roots, double log_level, double radius, std::uint64_t samples,
                            std::uint64_t seed);

}  // namespace serial

namespace omp {

std::uint64_t spike_count(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed);

std::vector<double> empirical_potential(std::span<const cplx> points, std::span<const cplx> grid);

std::uint64_t sublevel_hits(std::span<const cplx> roots, double log_level, double radius, std::uint64_t samples,
                            std::uint64_t seed);

}  // namespace omp

/// Shared per-sample helpers.
inline cplx disk_sample(const CounterRng& rng, std::uint64_t i, double radius) {
    const double r = radius * std::sqrt(rng.uniform(i, 0));
    return std::polar(r, 2.0 * std::numbers::pi * rng.uniform(i, 1));
}

inline double potential_at(std::span<const cplx> points, cplx z) {
    double acc = 0.0;
    for (const auto& x : points) {
        const double d = std::abs(z - x);
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        acc += std::log(d);
    }
    return -acc / static_cast<double>(points.size());
}

inline double log_abs_monic(std::span<const cplx> roots, cplx z) {
    double acc = 0.0;
    for (const auto& r : roots) acc += std::log(std::abs(z - r));
    return acc;
}

}  // namespace rpz::kernels
