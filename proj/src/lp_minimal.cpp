#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "rpz/bases.hpp"
#include "rpz/detail/basis_build.hpp"

namespace rpz {

namespace {

double chebyshev_t(int k, double t) {
    if (std::abs(t) <= 1.0) return std::cos(k * std::acos(t));
    const double s = t > 0 ? 1.0 : ((k % 2) ? -1.0 : 1.0);
    return s * std::cosh(k * std::acosh(std::abs(t)));
}

// Clenshaw summation of sum_k c_k T_k(t).
double clenshaw(const std::vector<double>& c, double t) {
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        const double b0 = 2.0 * t * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + c[0];
}

// One monic L^p minimizer of degree n by iteratively reweighted least squares
// in the orthonormal coordinates. Returns coefficients in phi_0..phi_n.
Eigen::VectorXcd irls_monic(const OrthonormalSystem& sys, int n, double p, const LpOptions& opts) {
    const auto& w = sys.measure().weights;
    const auto& q = sys.node_values();
    const Eigen::Index m = q.rows();
    const double lead = sys.monomials()[n][n].real();
    const Eigen::VectorXcd f = q.col(n) / lead;
    const Eigen::MatrixXcd phi = q.leftCols(n);

    auto objective = [&](const Eigen::VectorXcd& vals) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) s += w[i] * std::pow(std::abs(vals[i]), p);
        return s;
    };

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd vals = f;
    double obj = objective(vals);
    Eigen::VectorXcd best = c;
    double best_obj = obj;
    const double damping = p > 2.0 ? 1.0 / (p - 1.0) : 1.0;
    double change = 1.0;

    for (int it = 0; it < opts.max_iterations; ++it) {
        const double floor = 1e-12 * vals.cwiseAbs().maxCoeff();
        Eigen::VectorXd sw(m);
        for (Eigen::Index i = 0; i < m; ++i)
            sw[i] = std::sqrt(w[i] * std::pow(std::max(std::abs(vals[i]), floor), p - 2.0));
        const Eigen::MatrixXcd a = sw.asDiagonal() * phi;
        const Eigen::VectorXcd rhs = -(sw.asDiagonal() * f);
        const Eigen::VectorXcd target = a.colPivHouseholderQr().solve(rhs);
        c += damping * (target - c);
        vals = f + phi * c;
        const double next = objective(vals);
        change = std::abs(obj - next) / std::max(obj, 1e-300);
        obj = next;
        if (obj < best_obj) best_obj = obj, best = c;
        if (change < opts.relative_tolerance) {
            Eigen::VectorXcd out(n + 1);
            out.head(n) = best;
            out[n] = 1.0 / lead;
            return out;
        }
    }
    std::vector<cplx> mono(n + 1, cplx{});
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= j; ++k) mono[k] += best[j] * sys.monomials()[j][k];
    for (int k = 0; k <= n; ++k) mono[k] += sys.monomials()[n][k] / lead;
    throw IterationLimitError("L^p minimization (p=" + std::to_string(p) + ", n=" + std::to_string(n) +
                                  ") did not converge",
                              std::move(mono), change);
}

}  // namespace

RemezResult remez_monic(int n, int max_iterations) {
    RemezResult r;
    r.cheb.assign(n + 1, 0.0);
    r.cheb[n] = 1.0;
    if (n == 0) {
        r.level = 1.0;
        return r;
    }
    // Reference: Chebyshev-Lobatto points, ascending.
    std::vector<double> ref(n + 1);
    for (int j = 0; j <= n; ++j) ref[j] = -std::cos(std::numbers::pi * j / n);
    const int dense = 40 * n + 400;
    std::vector<double> grid(dense);
    for (int j = 0; j < dense; ++j) grid[j] = -std::cos(std::numbers::pi * j / (dense - 1));

    for (int it = 1; it <= max_iterations; ++it) {
        r.iterations = it;
        // Unknowns d_0..d_{n-1}, E: T_n(t_j) + sum d_k T_k(t_j) = (-1)^j E.
        Eigen::MatrixXd a(n + 1, n + 1);
        Eigen::VectorXd rhs(n + 1);
        for (int j = 0; j <= n; ++j) {
            for (int k = 0; k < n; ++k) a(j, k) = chebyshev_t(k, ref[j]);
            a(j, n) = (j % 2) ? 1.0 : -1.0;
            rhs[j] = -chebyshev_t(n, ref[j]);
        }
        const Eigen::VectorXd sol = a.partialPivLu().solve(rhs);
        for (int k = 0; k < n; ++k) r.cheb[k] = sol[k];
        const double level = std::abs(sol[n]);

        std::vector<double> err(dense);
        for (int j = 0; j < dense; ++j) err[j] = clenshaw(r.cheb, grid[j]);
        double max_err = 0.0;
        for (double e : err) max_err = std::max(max_err, std::abs(e));
        r.level = level;
        if (max_err - level <= 1e-12 * level) break;

        // Exchange: local extrema of the error, alternating in sign.
        std::vector<int> ext;
        for (int j = 0; j < dense; ++j) {
            const bool left = j == 0 || std::abs(err[j]) >= std::abs(err[j - 1]);
            const bool right = j == dense - 1 || std::abs(err[j]) >= std::abs(err[j + 1]);
            if (left && right) ext.push_back(j);
        }
        std::vector<int> alt;
        for (int j : ext) {
            if (!alt.empty() && (err[alt.back()] > 0) == (err[j] > 0)) {
                if (std::abs(err[j]) > std::abs(err[alt.back()])) alt.back() = j;
            } else {
                alt.push_back(j);
            }
        }
        while (static_cast<int>(alt.size()) > n + 1) {
            if (std::abs(err[alt.front()]) < std::abs(err[alt.back()])) alt.erase(alt.begin());
            else alt.pop_back();
        }
        if (static_cast<int>(alt.size()) < n + 1) break;
        for (int j = 0; j <= n; ++j) ref[j] = grid[alt[j]];
    }
    return r;
}

Basis lp_minimal_basis(const DiscretizedMeasure& measure, double p, int max_degree, const LpOptions& opts) {
    if (!(p >= 1.0)) throw ValidationError("lp_minimal_basis requires p >= 1");
    const Support& support = measure.support;
    if (std::isinf(p) && support.kind() == SupportKind::ellipse)
        throw CapabilityError("sup-norm minimal polynomials are only built for circle and interval supports");

    auto sys = std::make_shared<const OrthonormalSystem>(measure, max_degree);
    Eigen::MatrixXcd combo = Eigen::MatrixXcd::Zero(max_degree + 1, max_degree + 1);
    std::vector<double> norms(max_degree + 1, 1.0);

    if (p == 2.0) {
        combo.setIdentity();
        return detail::make_basis(BasisKind::lp_minimal, p, sys, std::move(combo), std::move(norms), {});
    }

    const auto& nodes = measure.nodes;
    const auto m = static_cast<Eigen::Index>(nodes.size());
    if (std::isinf(p)) {
        for (int n = 0; n <= max_degree; ++n) {
            Eigen::VectorXcd vals(m);
            if (support.kind() == SupportKind::circle) {
                for (Eigen::Index i = 0; i < m; ++i) vals[i] = std::pow(nodes[i] / support.radius(), n);
            } else {
                const RemezResult rz = remez_monic(n);
                const double mid = 0.5 * (support.a() + support.b()), h = 0.5 * (support.b() - support.a());
                for (Eigen::Index i = 0; i < m; ++i)
                    vals[i] = clenshaw(rz.cheb, (nodes[i].real() - mid) / h) / rz.level;
            }
            combo.row(n).head(n + 1) = detail::project(*sys, vals, n).transpose();
        }
        return detail::make_basis(BasisKind::lp_minimal, p, sys, std::move(combo), std::move(norms), {});
    }

    std::vector<Eigen::VectorXcd> rows(max_degree + 1);
    std::vector<std::exception_ptr> errors(max_degree + 1);
#pragma omp parallel for schedule(dynamic)
    for (int n = 0; n <= max_degree; ++n) {
        try {
            rows[n] = n == 0 ? Eigen::VectorXcd::Constant(1, 1.0 / sys->monomials()[0][0]) : irls_monic(*sys, n, p, opts);
        } catch (...) {
            errors[n] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (int n = 0; n <= max_degree; ++n) {
        const Eigen::VectorXcd vals = sys->node_values().leftCols(n + 1) * rows[n];
        combo.row(n).head(n + 1) = (rows[n] / lp_norm(measure, vals, p)).transpose();
    }
    return detail::make_basis(BasisKind::lp_minimal, p, sys, std::move(combo), std::move(norms), {});
}

}  // namespace rpz
