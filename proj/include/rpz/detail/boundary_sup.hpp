#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace rpz {

template <class F>
double boundary_sup(const Support& support, F&& f, int grid_count) {
    const bool periodic = support.periodic();
    const double lo = support.param_lo();
    const double hi = support.param_hi();
    std::vector<double> ts(grid_count);
    for (int j = 0; j < grid_count; ++j) {
        if (periodic) {
            ts[j] = lo + (hi - lo) * j / grid_count;
        } else {
            const double c = std::cos(std::numbers::pi * (grid_count - 1 - j) / (grid_count - 1));
            ts[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
        }
    }
    std::vector<double> vals(grid_count);
    for (int j = 0; j < grid_count; ++j) vals[j] = std::abs(f(support.boundary_point(ts[j])));

    std::vector<int> order(grid_count);
    std::iota(order.begin(), order.end(), 0);
    const int refine = std::min(grid_count, 8);
    std::partial_sort(order.begin(), order.begin() + refine, order.end(),
                      [&](int x, int y) { return vals[x] > vals[y]; });

    double best = vals[order[0]];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int r = 0; r < refine; ++r) {
        const int j = order[r];
        double a, b;
        if (periodic) {
            const double step = (hi - lo) / grid_count;
            a = ts[j] - step;
            b = ts[j] + step;
        } else {
            a = ts[std::max(j - 1, 0)];
            b = ts[std::min(j + 1, grid_count - 1)];
        }
        auto g = [&](double t) { return std::abs(f(support.boundary_point(t))); };
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double gc = g(c), gd = g(d);
        for (int it = 0; it < 60 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            if (gc > gd) {
                b = d;
                d = c;
                gd = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + inv_phi * (b - a);
                gd = g(d);
            }
        }
        best = std::max({best, gc, gd});
    }
    return best;
}

}  // namespace rpz
