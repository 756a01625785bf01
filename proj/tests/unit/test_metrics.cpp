#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rpz/metrics.hpp"

using namespace rpz;
using std::numbers::pi;

namespace {

std::vector<cplx> roots_of_unity(int n, double phase = 0.0) {
    std::vector<cplx> z;
    for (int k = 0; k < n; ++k) z.push_back(std::polar(1.0, phase + 2.0 * pi * k / n));
    return z;
}

EmpiricalMeasure emp(std::vector<cplx> z) {
    const int n = static_cast<int>(z.size());
    return zero_measure(std::move(z), n);
}

std::vector<cplx> monic_from_roots(const std::vector<cplx>& r) {
    std::vector<cplx> c = {1.0};
    for (const auto& x : r) {
        std::vector<cplx> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= x * c[k];
        }
        c = next;
    }
    return c;
}

}  // namespace

TEST_CASE("log potential examples") {
    CHECK(log_potential(emp({cplx(0, 1), cplx(0, -1)}), 0.0) == doctest::Approx(0.0));
    const EquilibriumOracle circle(Support::circle(1.0));
    CHECK(log_potential(circle, 2.0) == doctest::Approx(-std::log(2.0)));
    CHECK(std::abs(log_potential(emp(roots_of_unity(64)), 3.0) + std::log(3.0)) < 5e-3);
    CHECK(std::isinf(log_potential(emp({cplx(1, 0)}), 1.0)));
}

TEST_CASE("potential additivity and translation covariance") {
    const CounterRng rng(21);
    std::vector<cplx> a, b, u;
    for (int i = 0; i < 20; ++i) {
        a.push_back({rng.normal(i, 0), rng.normal(i, 1)});
        b.push_back({rng.normal(i, 2), rng.normal(i, 3)});
    }
    u = a;
    u.insert(u.end(), b.begin(), b.end());
    const cplx w(1.7, -0.4);
    for (int t = 0; t < 20; ++t) {
        const cplx z = {3.0 * rng.normal(100 + t, 0), 3.0 * rng.normal(100 + t, 1)};
        const double pu = log_potential(emp(u), z);
        CHECK(std::abs(pu - 0.5 * (log_potential(emp(a), z) + log_potential(emp(b), z))) < 1e-12);
        std::vector<cplx> shifted(a);
        for (auto& x : shifted) x += w;
        CHECK(std::abs(log_potential(emp(shifted), z + w) - log_potential(emp(a), z)) < 1e-12);
    }
}

TEST_CASE("energy examples") {
    CHECK(energy(emp(roots_of_unity(3))).value == doctest::Approx(-0.5 * std::log(3.0)));
    for (int n : {5, 17, 64}) CHECK(energy(emp(roots_of_unity(n))).value == doctest::Approx(-std::log(n) / (n - 1)));
    CHECK(std::abs(energy(emp({0.0, 1.0})).value) < 1e-15);
    const auto s = energy(emp({0.5, 0.5, 1.0}));
    CHECK(s.singular);
    CHECK(std::isinf(s.value));
    CHECK_THROWS_AS(energy(emp({0.5})), ValidationError);
}

TEST_CASE("potential discrepancy examples") {
    const Support c = Support::circle(1.0);
    const EquilibriumOracle o(c);
    const auto f = fekete_points(c, 128);
    CHECK(potential_discrepancy(emp(f.points), o) < 0.05);
    // A point mass at the center has the equilibrium potential outside the disk.
    const auto center = emp({0.0});
    CHECK(potential_discrepancy(center, o) < 1e-12);
    const std::vector<cplx> probe = {2.0, 0.2};
    CHECK(potential_discrepancy(center, o, probe) == doctest::Approx(std::log(5.0)));
    for (const auto& s : {Support::circle(1.0), Support::interval(-1.0, 1.0), Support::ellipse(1.25, 0.75)}) {
        const EquilibriumOracle os(s);
        CHECK(potential_discrepancy(emp(os.discretization(256)), os) < 1e-2);
    }
}

TEST_CASE("boundary KS") {
    const EquilibriumOracle o(Support::circle(1.0));
    for (int n : {8, 64, 256}) {
        CHECK(boundary_ks(emp(roots_of_unity(n)), o, Projection::angle).ks == doctest::Approx(1.0 / n));
        CHECK(boundary_ks(emp(std::vector<cplx>(n, 1.0)), o, Projection::angle).ks >= 1.0 - 1.0 / n);
    }
    for (const auto& s : {Support::circle(2.0), Support::interval(-1.0, 3.0), Support::ellipse(1.25, 0.75)}) {
        const EquilibriumOracle os(s);
        for (int n : {10, 101, 256}) {
            const auto r = boundary_ks(emp(os.discretization(n)), os, default_projection(s));
            CHECK(r.ks <= 1.0 / n + 1e-12);
        }
    }
    const EquilibriumOracle iv(Support::interval(-1.0, 1.0));
    const auto r = boundary_ks(emp({cplx(0.0, 0.5), cplx(0.0, -0.25)}), iv, Projection::real_part);
    CHECK(r.im_mean == doctest::Approx(0.375));
    CHECK_THROWS_AS(boundary_ks(emp(roots_of_unity(4)), iv, Projection::angle), ValidationError);
    CHECK(default_projection(Support::interval(0.0, 1.0)) == Projection::real_part);
}

TEST_CASE("mass outside") {
    CHECK(mass_outside(emp({cplx(0, 1), cplx(0, -1)}), 2.0) == 0.0);
    const std::vector<cplx> q = {1e-6, 1.0, 1e-6};
    CHECK(mass_outside(emp(roots(std::span<const cplx>(q)).roots), 5.0) == 0.5);
    const CounterRng rng(8);
    std::vector<cplx> z;
    for (int i = 0; i < 200; ++i) z.push_back({3.0 * rng.normal(i, 0), 3.0 * rng.normal(i, 1)});
    const auto m = emp(z);
    double prev = 1.0;
    for (double r = 0.1; r < 20.0; r += 0.1) {
        const double v = mass_outside(m, r);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK_THROWS_AS(mass_outside(m, 0.0), ValidationError);
}

TEST_CASE("interior mass") {
    const auto m = emp({0.0, 0.5, 0.95, 2.0});
    CHECK(interior_mass(m, Support::circle(1.0), 0.1) == 0.5);
    CHECK(interior_mass(m, Support::interval(-1.0, 1.0), 0.1) == 0.0);
}

TEST_CASE("Cartan estimate") {
    std::vector<cplx> zn(11, 0.0);
    zn[10] = 1.0;
    const auto r = cartan_check(zn, 0.5, 100000, 1);
    CHECK(r.area == doctest::Approx(pi / 4).epsilon(1e-9));
    CHECK(r.bound == doctest::Approx(25.0 * pi * std::exp(2.0) * 0.25));
    CHECK(r.pass);
    const CounterRng rng(2);
    for (int degree : {5, 20, 50}) {
        // The full 100-per-degree sweep runs in the acceptance suite.
        for (int t = 0; t < 10; ++t) {
            std::vector<cplx> rts;
            for (int i = 0; i < degree; ++i) rts.push_back({rng.normal(t * 64 + i, 2 * degree), rng.normal(t * 64 + i, 2 * degree + 1)});
            CHECK(cartan_check_roots(rts, 0.3, 100000, derive_seed(t, degree, "cartan")).pass);
        }
    }
    std::vector<cplx> unit;
    for (int i = 0; i < 5; ++i) unit.push_back(std::polar(0.9 * rng.uniform(i, 7), 2.0 * pi * rng.uniform(i, 8)));
    const auto big = cartan_check(monic_from_roots(unit), 10.0, 100000, 3);
    CHECK(big.pass);
    CHECK(big.area <= pi * 11.0 * 11.0 * 1.01);
}

TEST_CASE("annulus floor") {
    std::vector<cplx> zn(9, 0.0);
    zn[8] = 1.0;
    const auto r = annulus_floor(zn, 1.0, 2.0, 16, 64);
    CHECK(r.pass);
    CHECK(r.best_radius == doctest::Approx(1.0 + 16.0 / 17.0));
    CHECK(r.log_floor == doctest::Approx(8.0 * std::log(r.best_radius)));
    CHECK(r.log_threshold == doctest::Approx(8.0 * std::log(0.2)));
    const CounterRng rng(31);
    for (int t = 0; t < 100; ++t) {
        std::vector<cplx> rts;
        for (int i = 0; i < 15; ++i)
            rts.push_back(std::polar(3.0 * std::sqrt(rng.uniform(t * 16 + i, 0)), 2.0 * pi * rng.uniform(t * 16 + i, 1)));
        const auto a = annulus_floor_roots(rts, 4.0, 5.0, 16, 256);
        CHECK(a.pass);
        CHECK(a.log_floor >= 15.0 * std::log(a.best_radius - 3.0) - 1e-9);
        const auto b = annulus_floor(monic_from_roots(rts), 4.0, 5.0, 16, 256);
        CHECK(b.log_floor == doctest::Approx(a.log_floor).epsilon(1e-8));
    }
}

TEST_CASE("deterministic criterion") {
    const Support c = Support::circle(1.0);
    const auto b = orthonormal_basis(default_measure(c, 32), 32);
    const auto grid = interior_grid(c, 0.8, 8, 32);
    const auto rep = det_criterion_report(b, b.measure(), 2.0, 0, grid);
    CHECK_FALSE(rep.vacuous_interior);
    double rmax = 0.0;
    for (const auto& z : grid) rmax = std::max(rmax, std::abs(z));
    for (const auto& row : rep.rows) {
        CHECK(std::abs(row.c1) < 1e-10);
        CHECK(row.c2 < 0.0);
        double lo = 1e300;
        for (const auto& z : grid) lo = std::min(lo, std::log(std::abs(z)));
        if (std::isinf(lo)) CHECK(row.c2 == lo);
        else CHECK(row.c2 == doctest::Approx(lo));
    }
    // Shifted i_n lands on zero monomial coefficients.
    const auto shifted = det_criterion_report(b, b.measure(), 2.0, 1, grid);
    for (const auto& row : shifted.rows) {
        CHECK(row.c1_undefined);
        CHECK(std::isinf(row.c1));
        CHECK(row.c1 < 0);
    }

    const auto d = make_distribution("gaussian");
    const auto big = orthonormal_basis(default_measure(c, 128), 128);
    int ok = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto g = sample_G(big, d, 128, derive_seed(1, t, "coefficients"));
        if (det_criterion_row(big, g, big.measure(), 2.0, grid).c2 >= -0.2) ++ok;
    }
    CHECK(ok >= 45);

    const Support iv = Support::interval(-2.0, 2.0);
    const auto bi = orthonormal_basis(default_measure(iv, 16), 16);
    const auto ri = det_criterion_report(bi, bi.measure(), 2.0, 0, interior_grid(iv, 0.8, 8, 32));
    CHECK(ri.vacuous_interior);
    for (const auto& row : ri.rows) CHECK(std::isnan(row.c2));
}
