#include "rpz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rpz/kernels.hpp"
#include "rpz/parallel.hpp"

namespace rpz {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

double log_potential(const EmpiricalMeasure& m, cplx z) {
    if (m.points.empty()) throw ValidationError("log_potential of an empty measure");
    return kernels::potential_at(m.points, z);
}

double log_potential(const EquilibriumOracle& oracle, cplx z) { return oracle.potential(z); }

EnergyResult energy(const EmpiricalMeasure& m) {
    const std::size_t D = m.points.size();
    if (D < 2) throw ValidationError("energy needs at least two points");
    double acc = 0.0;
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = i + 1; j < D; ++j) {
            const double d = std::abs(m.points[i] - m.points[j]);
            if (d == 0.0) return {inf, true};
            acc += std::log(d);
        }
    return {-2.0 * acc / (static_cast<double>(D) * static_cast<double>(D - 1)), false};
}

double potential_discrepancy(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, std::span<const cplx> grid) {
    const auto emp = kernels::omp::empirical_potential(m.points, grid);
    double worst = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) worst = std::max(worst, std::abs(emp[g] - oracle.potential(grid[g])));
    return worst;
}

double potential_discrepancy(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, const GridSpec& spec) {
    const auto grid = exterior_grid(oracle.support(), spec);
    return potential_discrepancy(m, oracle, grid);
}

std::string to_string(Projection p) { return p == Projection::angle ? "angle" : "real_part"; }

Projection default_projection(const Support& support) {
    return support.kind() == SupportKind::interval ? Projection::real_part : Projection::angle;
}

KsResult boundary_ks(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, Projection projection) {
    if (m.points.empty()) throw ValidationError("boundary_ks of an empty measure");
    if (projection != default_projection(oracle.support()))
        throw ValidationError("projection " + to_string(projection) + " does not match the support");
    std::vector<double> s;
    s.reserve(m.points.size());
    double im = 0.0;
    for (const auto& z : m.points) {
        s.push_back(oracle.project(z));
        im += std::abs(z.imag());
    }
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = oracle.boundary_cdf(s[i]);
        ks = std::max({ks, (i + 1) / n - F, F - i / n});
    }
    return {ks, im / n};
}

double mass_outside(const EmpiricalMeasure& m, double r) {
    if (!(r > 0.0)) throw ValidationError("mass_outside needs r > 0");
    if (m.points.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& z : m.points)
        if (std::abs(z) > r) ++c;
    return static_cast<double>(c) / static_cast<double>(m.points.size());
}

double interior_mass(const EmpiricalMeasure& m, const Support& support, double margin) {
    if (m.points.empty() || support.kind() == SupportKind::interval) return 0.0;
    const double a = support.kind() == SupportKind::circle ? support.radius() : support.alpha();
    const double b = support.kind() == SupportKind::circle ? support.radius() : support.beta();
    if (b <= margin) return 0.0;
    std::size_t c = 0;
    for (const auto& z : m.points) {
        const double x = z.real() / (a - margin), y = z.imag() / (b - margin);
        if (x * x + y * y < 1.0) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(m.points.size());
}

CartanResult cartan_check_roots(std::span<const cplx> rts, double h, std::uint64_t samples, std::uint64_t seed) {
    if (!(h > 0.0)) throw ValidationError("cartan_check needs h > 0");
    if (samples == 0) throw ValidationError("cartan_check needs samples > 0");
    double rmax = 0.0;
    for (const auto& z : rts) rmax = std::max(rmax, std::abs(z));
    CartanResult r;
    r.radius = rmax + h;
    r.bound = 25.0 * std::numbers::pi * std::exp(2.0) * h * h;
    const double level = static_cast<double>(rts.size()) * std::log(h);
    const auto hits = kernels::omp::sublevel_hits(rts, level, r.radius, samples, seed);
    const double f = static_cast<double>(hits) / static_cast<double>(samples);
    const double disk = std::numbers::pi * r.radius * r.radius;
    r.area = disk * f;
    r.standard_error = disk * std::sqrt(f * (1.0 - f) / static_cast<double>(samples));
    r.pass = r.area - 3.0 * r.standard_error <= r.bound;
    return r;
}

CartanResult cartan_check(std::span<const cplx> zeta, double h, std::uint64_t samples, std::uint64_t seed) {
    const auto rr = roots(zeta);
    return cartan_check_roots(rr.roots, h, samples, seed);
}

AnnulusResult annulus_floor_roots(std::span<const cplx> rts, double r1, double r2, int radial, int angular) {
    if (!(r1 > 0.0 && r2 > r1)) throw ValidationError("annulus_floor needs 0 < r1 < r2");
    if (radial < 1 || angular < 1) throw ValidationError("annulus_floor needs positive grid sizes");
    std::vector<double> floor(radial);
    parallel_for(static_cast<std::size_t>(radial), [&](std::size_t k) {
        const double rho = r1 + (r2 - r1) * static_cast<double>(k + 1) / (radial + 1);
        double lo = inf;
        for (int a = 0; a < angular; ++a)
            lo = std::min(lo, kernels::log_abs_monic(rts, std::polar(rho, 2.0 * std::numbers::pi * a / angular)));
        floor[k] = lo;
    });
    AnnulusResult r;
    const auto best = std::max_element(floor.begin(), floor.end());
    const auto k = best - floor.begin();
    r.best_radius = r1 + (r2 - r1) * static_cast<double>(k + 1) / (radial + 1);
    r.log_floor = *best;
    r.log_threshold = static_cast<double>(rts.size()) * std::log((r2 - r1) / 5.0);
    r.pass = r.log_floor >= r.log_threshold;
    return r;
}

AnnulusResult annulus_floor(std::span<const cplx> zeta, double r1, double r2, int radial, int angular) {
    const auto rr = roots(zeta);
    return annulus_floor_roots(rr.roots, r1, r2, radial, angular);
}

namespace {

double log_lp_norm(const DiscretizedMeasure& m, const std::vector<ScaledComplex>& vals, double p) {
    std::int64_t top = std::numeric_limits<std::int64_t>::min();
    for (const auto& v : vals)
        if (!v.is_zero()) top = std::max(top, v.exp2);
    if (top == std::numeric_limits<std::int64_t>::min()) return -inf;
    Eigen::VectorXcd x(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = vals[i].is_zero() ? cplx(0.0, 0.0) : ScaledComplex(vals[i].mant, vals[i].exp2 - top).to_complex();
    return std::log(lp_norm(m, x, p)) + static_cast<double>(top) * std::numbers::ln2;
}

}  // namespace

DetCriterionReport det_criterion_report(const Basis& basis, const DiscretizedMeasure& measure, double p,
                                        std::optional<int> i_n, std::span<const cplx> interior) {
    DetCriterionReport rep;
    const Support& K = basis.support();
    rep.vacuous_interior = !K.interior_flag();
    const double log_cap = std::log(K.capacity());
    const auto norms = basis_norms(basis, measure, p);
    const int N = basis.degree_max();
    rep.rows.resize(N);
    // Interior values of every p_n at once.
    std::vector<std::vector<cplx>> vals(interior.size());
    if (!rep.vacuous_interior)
        parallel_for(interior.size(), [&](std::size_t g) { vals[g] = basis.evaluate(interior[g]); });
    for (int n = 1; n <= N; ++n) {
        DetCriterionRow& row = rep.rows[n - 1];
        row.n = n;
        row.i_n = std::clamp(i_n.value_or(0), 0, n);
        const double lead = std::abs(basis.coeff(n, n - row.i_n));
        if (lead == 0.0) {
            row.c1 = -inf;
            row.c1_undefined = true;
            row.c2 = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double dn = static_cast<double>(n);
        row.c1 = std::log(norms[n] / lead) / dn - log_cap;
        if (rep.vacuous_interior || interior.empty()) {
            row.c2 = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double lo = inf;
        for (const auto& v : vals) lo = std::min(lo, std::log(std::abs(v[n]) / lead) / dn);
        row.c2 = lo - log_cap;
    }
    return rep;
}

DetCriterionRow det_criterion_row(const Basis& basis, const RandomPolynomial& g, const DiscretizedMeasure& measure,
                                  double p, std::span<const cplx> interior) {
    const int n = g.n;
    const NearLeading nl = near_leading_index(g.zeta, n);
    DetCriterionRow row;
    row.n = n;
    row.i_n = nl.index_gap;
    const double log_cap = std::log(basis.support().capacity());
    const double log_lead = nl.value.log_abs();
    const double dn = static_cast<double>(n);
    std::vector<ScaledComplex> at_nodes(measure.nodes.size());
    parallel_for(measure.nodes.size(), [&](std::size_t i) { at_nodes[i] = evaluate_G(basis, g, measure.nodes[i]); });
    row.c1 = (log_lp_norm(measure, at_nodes, p) - log_lead) / dn - log_cap;
    if (!basis.support().interior_flag() || interior.empty()) {
        row.c2 = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    std::vector<double> lo(interior.size());
    parallel_for(interior.size(), [&](std::size_t i) { lo[i] = evaluate_G(basis, g, interior[i]).log_abs(); });
    row.c2 = (*std::min_element(lo.begin(), lo.end()) - log_lead) / dn - log_cap;
    return row;
}

}  // namespace rpz
