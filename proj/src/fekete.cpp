#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "rpz/bases.hpp"
#include "rpz/detail/basis_build.hpp"
#include "rpz/rng.hpp"

namespace rpz {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double log_vandermonde(const std::vector<cplx>& z) {
    double e = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) e += std::log(std::abs(z[i] - z[j]));
    return e;
}

void canonicalize(const Support& support, std::vector<double>& t) {
    if (support.periodic()) {
        for (auto& x : t) {
            x = std::fmod(x, two_pi);
            if (x < 0) x += two_pi;
        }
        std::sort(t.begin(), t.end());
        // Rotation is a symmetry of the circle only: fix the first point at angle 0.
        if (support.kind() == SupportKind::circle) {
            const double t0 = t.front();
            for (auto& x : t) x -= t0;
        }
    } else {
        std::sort(t.begin(), t.end());
    }
}

// Damped Newton on the free parameters; the coordinate sweeps above only
// need to land in the basin. Rotations of the circle make the Hessian
// singular, hence the Levenberg shift.
void newton_polish(const Support& support, std::vector<double>& t, int max_iterations) {
    const int n = static_cast<int>(t.size());
    const bool periodic = support.periodic();
    const int first = periodic ? 0 : 1;
    const int last = periodic ? n - 1 : n - 2;
    const int m = last - first + 1;
    if (m <= 0) return;
    auto energy = [&](const std::vector<double>& s) {
        std::vector<cplx> z(n);
        for (int i = 0; i < n; ++i) z[i] = support.boundary_point(s[i]);
        return log_vandermonde(z);
    };
    double e = energy(t);
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<cplx> z(n), d1(n), d2(n);
        for (int i = 0; i < n; ++i) {
            z[i] = support.boundary_point(t[i]);
            d1[i] = support.boundary_tangent(t[i]);
            d2[i] = support.boundary_curvature(t[i]);
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
        for (int i = first; i <= last; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const cplx inv = 1.0 / (z[i] - z[j]);
                g[i - first] += (d1[i] * inv).real();
                h(i - first, i - first) += (d2[i] * inv - d1[i] * d1[i] * inv * inv).real();
                if (j >= first && j <= last) h(i - first, j - first) += (d1[i] * d1[j] * inv * inv).real();
            }
        }
        if (g.norm() < 1e-13 * n) break;
        double lambda = 1e-10 * h.diagonal().cwiseAbs().maxCoeff();
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries, lambda = std::max(10.0 * lambda, 1e-12)) {
            // Ascent direction from the negated (locally positive definite) Hessian.
            const Eigen::MatrixXd a = -h + lambda * Eigen::MatrixXd::Identity(m, m);
            const Eigen::VectorXd step = a.ldlt().solve(g);
            std::vector<double> trial = t;
            bool ordered = true;
            for (int i = first; i <= last; ++i) trial[i] += step[i - first];
            for (int i = 1; i < n; ++i) ordered = ordered && trial[i] > trial[i - 1];
            if (periodic) ordered = ordered && trial[n - 1] < trial[0] + two_pi;
            else ordered = ordered && trial[first] > t[0] && trial[last] < t[n - 1];
            if (!ordered) continue;
            const double et = energy(trial);
            if (et >= e) {
                improved = true;
                t = std::move(trial);
                e = et;
            }
        }
        if (!improved) break;
    }
}

FeketeResult ascend(const Support& support, std::vector<double> t, const FeketeOptions& opts) {
    const int n = static_cast<int>(t.size());
    const bool periodic = support.periodic();
    std::vector<cplx> z(n);
    std::sort(t.begin(), t.end());
    if (!periodic) {
        // Extreme points sit at the endpoints: log|x - x_j| is monotone beyond all others.
        t.front() = support.param_lo();
        t.back() = support.param_hi();
    }
    for (int i = 0; i < n; ++i) z[i] = support.boundary_point(t[i]);
    double energy = log_vandermonde(z);
    const int bits = std::numeric_limits<double>::digits / 2;

    int sweep = 0;
    for (; sweep < opts.max_sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double lo, hi;
            if (periodic) {
                lo = i == 0 ? t[n - 1] - two_pi : t[i - 1];
                hi = i == n - 1 ? t[0] + two_pi : t[i + 1];
            } else {
                if (i == 0 || i == n - 1) continue;
                lo = t[i - 1];
                hi = t[i + 1];
            }
            if (!(hi > lo)) continue;
            auto neg = [&](double s) {
                const cplx p = support.boundary_point(s);
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    if (j != i) acc += std::log(std::abs(p - z[j]));
                return -acc;
            };
            const double cur = neg(t[i]);
            const auto [s, val] = boost::math::tools::brent_find_minima(neg, lo, hi, bits);
            if (val < cur) {
                t[i] = s;
                z[i] = support.boundary_point(s);
            }
        }
        const double next = log_vandermonde(z);
        const double gain = next - energy;
        energy = std::max(energy, next);
        if (gain < opts.energy_tolerance) break;
        if (gain < 1e-6) {
            newton_polish(support, t, 50);
            for (int i = 0; i < n; ++i) z[i] = support.boundary_point(t[i]);
            energy = std::max(energy, log_vandermonde(z));
        }
    }
    canonicalize(support, t);
    FeketeResult r;
    r.params = t;
    r.points.resize(n);
    for (int i = 0; i < n; ++i) r.points[i] = support.boundary_point(t[i]);
    r.log_vandermonde = log_vandermonde(r.points);
    r.sweeps = sweep + 1;
    return r;
}

}  // namespace

FeketeResult fekete_points(const Support& support, int n, const FeketeOptions& opts) {
    if (n < 2) throw ValidationError("fekete_points needs n >= 2");
    const int restarts = std::max(1, opts.restarts);
    std::vector<FeketeResult> results(restarts);
    const CounterRng rng(hash_combine(opts.seed, static_cast<std::uint64_t>(n)));
    const double lo = support.param_lo(), hi = support.param_hi();

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> t(n);
        if (r == 0) {
            // Deterministic start: equispaced angles or Chebyshev-Lobatto points.
            for (int j = 0; j < n; ++j)
                t[j] = support.periodic() ? two_pi * j / n
                                          : 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * j / (n - 1));
        } else {
            for (int j = 0; j < n; ++j) t[j] = lo + (hi - lo) * rng.uniform(static_cast<std::uint64_t>(r), j);
        }
        results[r] = ascend(support, std::move(t), opts);
    }

    // Best energy; near-ties resolved toward the lexicographically smallest parameters.
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r) {
        const double d = results[r].log_vandermonde - results[best].log_vandermonde;
        if (d > 1e-12 || (std::abs(d) <= 1e-12 && results[r].params < results[best].params)) best = r;
    }
    return results[best];
}

Basis fekete_basis(const Support& support, int max_degree, const FeketeOptions& opts) {
    if (max_degree < 1) throw ValidationError("fekete_basis needs N >= 1");
    auto sys = std::make_shared<const OrthonormalSystem>(default_measure(support, max_degree), max_degree);
    const auto& nodes = sys->measure().nodes;
    const auto m = static_cast<Eigen::Index>(nodes.size());

    std::vector<std::vector<cplx>> points(max_degree + 1);
    points[1] = {support.center()};
    for (int n = 2; n <= max_degree; ++n) points[n] = fekete_points(support, n, opts).points;

    Eigen::MatrixXcd combo = Eigen::MatrixXcd::Zero(max_degree + 1, max_degree + 1);
    combo(0, 0) = 1.0 / sys->monomials()[0][0];
    std::vector<double> norms(max_degree + 1, 1.0);
    for (int n = 1; n <= max_degree; ++n) {
        const auto& pts = points[n];
        auto product = [&](cplx z) {
            cplx acc{1.0, 0.0};
            for (const auto& x : pts) acc *= z - x;
            return acc;
        };
        const double sup = boundary_sup(support, product);
        Eigen::VectorXcd vals(m);
        for (Eigen::Index i = 0; i < m; ++i) vals[i] = product(nodes[i]) / sup;
        combo.row(n).head(n + 1) = detail::project(*sys, vals, n).transpose();
    }
    return detail::make_basis(BasisKind::fekete, infinity_norm, sys, std::move(combo), std::move(norms),
                              std::move(points));
}

}  // namespace rpz
