#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rpz/bases.hpp"
#include "rpz/rng.hpp"

using namespace rpz;
using std::numbers::pi;

namespace {

// Monic Chebyshev polynomial of [-2, 2] (2 T_n(x/2)) by C_{n+1} = x C_n - C_{n-1}.
std::vector<std::vector<double>> monic_cheb(int N) {
    std::vector<std::vector<double>> c(N + 1);
    c[0] = {1.0};
    if (N >= 1) c[1] = {0.0, 1.0};
    if (N >= 2) c[2] = {-2.0, 0.0, 1.0};
    for (int n = 2; n < N; ++n) {
        c[n + 1].assign(n + 2, 0.0);
        for (int k = 0; k <= n; ++k) c[n + 1][k + 1] += c[n][k];
        for (int k = 0; k < n; ++k) c[n + 1][k] -= c[n - 1][k];
    }
    return c;
}

cplx horner(const std::vector<cplx>& a, cplx z) {
    cplx s = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) s = s * z + a[k];
    return s;
}

double gram_defect(const Basis& b) {
    const auto& m = b.measure();
    double worst = 0.0;
    const int N = b.degree_max();
    for (int i = 0; i <= N; ++i) {
        const auto vi = b.node_values(i);
        for (int j = 0; j <= N; ++j) {
            const auto vj = b.node_values(j);
            cplx s = 0.0;
            for (std::size_t k = 0; k < m.nodes.size(); ++k) s += m.weights[k] * vi[k] * std::conj(vj[k]);
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double fekete_capacity_estimate(const FeketeResult& r) {
    const double n = static_cast<double>(r.points.size());
    return std::exp(2.0 * r.log_vandermonde / (n * (n - 1.0)));
}

}  // namespace

TEST_CASE("circle orthonormal basis is the monomials") {
    const auto b = orthonormal_basis(reference_measure(Support::circle(1.0), MeasureDensity::uniform_arclength, 260), 64);
    for (int n = 0; n <= 64; ++n)
        for (int k = 0; k <= n; ++k) CHECK(std::abs(b.coeff(n, k) - (n == k ? 1.0 : 0.0)) < 1e-10);
    const auto r = minimality_report(b, b.measure(), 2.0);
    for (double s : r.lead_slope) CHECK(std::abs(s) < 1e-14);
}

TEST_CASE("interval arcsine orthonormal basis is sqrt(2) T_n") {
    const auto m = reference_measure(Support::interval(-1.0, 1.0), MeasureDensity::equilibrium_density, 164);
    const auto b = orthonormal_basis(m, 40);
    CHECK(std::abs(b.coeff(0, 0) - 1.0) < 1e-12);
    for (int n = 1; n <= 40; ++n) {
        const double lead = std::sqrt(2.0) * std::ldexp(1.0, n - 1);
        CHECK(std::abs(b.coeff(n, n).real() - lead) < 1e-8 * lead);
        for (double x : {-0.97, -0.5, 0.1, 0.66}) {
            const double t = std::sqrt(2.0) * std::cos(n * std::acos(x));
            CHECK(std::abs(b.value(n, x) - t) < 1e-8);
        }
    }
    CHECK(std::abs(std::log(b.coeff(40, 40).real()) / 40.0 - std::log(2.0)) < 0.02);
}

TEST_CASE("orthonormal Gram matrices are the identity on every built-in") {
    for (const auto& s : {Support::circle(1.5), Support::interval(-2.0, 2.0), Support::ellipse(1.25, 0.75)}) {
        const int N = 60;
        const auto b = orthonormal_basis(default_measure(s, N), N);
        CHECK(gram_defect(b) < 1e-8);
        for (int n = 0; n <= N; ++n) {
            CHECK(b.coeff(n, n).imag() == 0.0);
            CHECK(b.coeff(n, n).real() > 0.0);
        }
    }
}

TEST_CASE("orthonormal basis rejects under-resolved measures") {
    const auto m = reference_measure(Support::circle(1.0), MeasureDensity::uniform_arclength, 16);
    CHECK_THROWS_AS(orthonormal_basis(m, 20), RankError);
}

TEST_CASE("L2 minimality of the normalized orthonormal polynomials") {
    const Support s = Support::interval(-2.0, 2.0);
    const int N = 12;
    const auto m = default_measure(s, N);
    const auto b = orthonormal_basis(m, N);
    const CounterRng rng(9);
    for (int n : {3, 7, 12}) {
        Eigen::VectorXcd v(m.nodes.size());
        for (std::size_t i = 0; i < m.nodes.size(); ++i) v[i] = b.value(n, m.nodes[i]) / b.coeff(n, n);
        const double best = lp_norm(m, v, 2.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<cplx> a(n + 1);
            for (int k = 0; k < n; ++k) a[k] = {rng.normal(trial * 100 + k, 0), rng.normal(trial * 100 + k, 1)};
            a[n] = 1.0;
            for (std::size_t i = 0; i < m.nodes.size(); ++i) v[i] = horner(a, m.nodes[i]);
            CHECK(best <= lp_norm(m, v, 2.0) + 1e-8);
        }
    }
}

TEST_CASE("L2-minimal basis equals the orthonormal basis on the circle") {
    const auto m = reference_measure(Support::circle(1.0), MeasureDensity::uniform_arclength, 100);
    const auto a = orthonormal_basis(m, 24);
    const auto b = lp_minimal_basis(m, 2.0, 24);
    for (int n = 0; n <= 24; ++n)
        for (int k = 0; k <= n; ++k) CHECK(std::abs(a.coeff(n, k) - b.coeff(n, k)) < 1e-8);
}

TEST_CASE("sup-norm minimal polynomials on [-2,2] are the Chebyshev polynomials") {
    const Support s = Support::interval(-2.0, 2.0);
    const int N = 20;
    const auto b = lp_minimal_basis(default_measure(s, N), infinity_norm, N);
    const auto cheb = monic_cheb(N);
    for (int n = 1; n <= N; ++n) {
        const cplx lead = b.coeff(n, n);
        // Unit sup norm after rescaling of a monic polynomial with sup norm 2 (n >= 1).
        CHECK(std::abs(lead.real() - 0.5) < 1e-8);
        for (int k = 0; k <= n; ++k) CHECK(std::abs(b.coeff(n, k) / lead - cheb[n][k]) < 1e-7 * std::max(1.0, std::abs(cheb[n][k])));
        CHECK(std::log(1.0 / lead.real()) / n == doctest::Approx(std::log(2.0) / n));
    }
}

TEST_CASE("Remez exchange returns the Chebyshev level") {
    for (int n : {1, 4, 9, 16}) {
        const auto r = remez_monic(n);
        CHECK(r.level == doctest::Approx(1.0).epsilon(1e-10));
        for (int k = 0; k < n; ++k) CHECK(std::abs(r.cheb[k]) < 1e-10);
    }
}

TEST_CASE("L^p minimizers for p = 1 and p = 4 are monic minimizers") {
    const Support s = Support::interval(-1.0, 1.0);
    const int N = 10;
    const auto m = default_measure(s, N);
    for (double p : {1.0, 4.0}) {
        const auto b = lp_minimal_basis(m, p, N);
        const CounterRng rng(static_cast<std::uint64_t>(p));
        for (int n : {2, 5, 10}) {
            Eigen::VectorXcd v(m.nodes.size());
            for (std::size_t i = 0; i < m.nodes.size(); ++i) v[i] = b.value(n, m.nodes[i]);
            CHECK(lp_norm(m, v, p) == doctest::Approx(1.0).epsilon(1e-9));
            std::vector<cplx> a(b.coeffs()[n].begin(), b.coeffs()[n].end());
            for (auto& x : a) x /= b.coeff(n, n);
            for (std::size_t i = 0; i < m.nodes.size(); ++i) v[i] = horner(a, m.nodes[i]);
            const double best = lp_norm(m, v, p);
            for (int t = 0; t < 20; ++t) {
                auto q = a;
                for (int k = 0; k < n; ++k) q[k] += 1e-3 * cplx(rng.normal(t * 64 + k, 0), rng.normal(t * 64 + k, 1));
                for (std::size_t i = 0; i < m.nodes.size(); ++i) v[i] = horner(q, m.nodes[i]);
                CHECK(best <= lp_norm(m, v, p) * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("Fekete points on the circle") {
    const auto r3 = fekete_points(Support::circle(1.0), 3);
    CHECK(std::exp(r3.log_vandermonde) == doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-6));
    // Brute force over the free angles of a 3-point configuration with one point pinned.
    double best = 0.0;
    for (int i = 1; i < 360; ++i)
        for (int j = i + 1; j < 360; ++j) {
            const cplx a = 1.0, b = std::polar(1.0, i * pi / 180), c = std::polar(1.0, j * pi / 180);
            best = std::max(best, std::abs(a - b) * std::abs(a - c) * std::abs(b - c));
        }
    CHECK(std::exp(r3.log_vandermonde) >= best - 1e-9);
    for (int n = 2; n <= 16; ++n) {
        const auto r = fekete_points(Support::circle(1.0), n);
        CHECK(std::exp(r.log_vandermonde) == doctest::Approx(std::pow(n, n / 2.0)).epsilon(1e-6));
    }
}

TEST_CASE("Fekete points on [-1,1] for n = 3") {
    const auto r = fekete_points(Support::interval(-1.0, 1.0), 3);
    std::vector<double> x;
    for (const auto& z : r.points) x.push_back(z.real());
    std::sort(x.begin(), x.end());
    CHECK(x[0] == doctest::Approx(-1.0));
    CHECK(std::abs(x[1]) < 1e-6);
    CHECK(x[2] == doctest::Approx(1.0));
    double best = 0.0;
    for (int i = 1; i < 20000; ++i) {
        const double t = -1.0 + i * 1e-4;
        best = std::max(best, 2.0 * (1.0 + t) * (1.0 - t));
    }
    CHECK(std::exp(r.log_vandermonde) >= best - 1e-9);
}

TEST_CASE("Fekete energy estimate of the capacity") {
    // On the circle the estimate is n^{1/(n-1)} in closed form.
    for (int n : {8, 24, 48}) {
        const auto r = fekete_points(Support::circle(1.0), n);
        CHECK(fekete_capacity_estimate(r) == doctest::Approx(std::pow(n, 1.0 / (n - 1))).epsilon(1e-6));
    }
    for (const auto& s : {Support::interval(-2.0, 2.0), Support::ellipse(1.25, 0.75)}) {
        double prev = 1e9;
        for (int n : {12, 24, 48}) {
            const double err = std::abs(fekete_capacity_estimate(fekete_points(s, n)) - s.capacity()) / s.capacity();
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 0.12);
    }
}

TEST_CASE("Fekete basis") {
    const auto b = fekete_basis(Support::interval(-1.0, 1.0), 6);
    // p_2 from {-1, 1}: x^2 - 1 with unit sup norm.
    CHECK(std::abs(b.coeff(2, 2) - 1.0) < 1e-9);
    CHECK(std::abs(b.coeff(2, 0) + 1.0) < 1e-9);
    for (int n = 1; n <= 6; ++n)
        CHECK(boundary_sup(b.support(), [&](cplx z) { return b.value(n, z); }) == doctest::Approx(1.0).epsilon(1e-6));
    const auto c = fekete_basis(Support::circle(1.0), 32);
    const auto r = minimality_report(c, c.measure(), infinity_norm);
    CHECK(std::abs(r.lead_slope.back()) < 0.05);
    // Rotated roots of unity: p_n = (z^n - e^{i phi}) / 2.
    for (int n = 2; n <= 32; ++n) {
        CHECK(std::abs(c.coeff(n, n) - 0.5) < 1e-6);
        CHECK(std::abs(std::abs(c.coeff(n, 0)) - 0.5) < 1e-6);
    }
}

TEST_CASE("Faber polynomials") {
    const auto circ = faber_basis(Support::circle(1.0), 12);
    for (int n = 0; n <= 12; ++n)
        for (int k = 0; k <= n; ++k) CHECK(std::abs(circ.coeff(n, k) - (n == k ? 1.0 : 0.0)) < 1e-12);

    const auto cheb = monic_cheb(20);
    for (double x : {-1.9, -0.3, 0.7, 2.0}) {
        const auto f = faber_values(Support::interval(-2.0, 2.0), 20, x);
        for (int n = 1; n <= 20; ++n) CHECK(f[n].real() == doctest::Approx(2.0 * std::cos(n * std::acos(x / 2.0))).epsilon(1e-9));
    }
    const auto iv = faber_basis(Support::interval(-2.0, 2.0), 20);
    for (int n = 1; n <= 20; ++n)
        for (int k = 0; k <= n; ++k) CHECK(std::abs(2.0 * iv.coeff(n, k) - cheb[n][k]) < 1e-7 * std::max(1.0, std::abs(cheb[n][k])));

    // F_n(psi(w)) = w^n + k^n w^{-n} on the ellipse.
    const Support e = Support::ellipse(1.25, 0.75);
    const double kk = 0.25;
    for (cplx w : {cplx(1.0, 0.0), std::polar(1.3, 0.4), std::polar(2.0, 2.0)}) {
        const auto f = faber_values(e, 16, e.inverse_map(w));
        for (int n = 0; n <= 16; ++n) {
            const cplx expect = n == 0 ? cplx(1.0) : std::pow(w, n) + std::pow(kk, n) * std::pow(w, -n);
            CHECK(std::abs(f[n] - expect) < 1e-9 * std::abs(expect));
        }
    }
    const auto eb = faber_basis(e, 32);
    const auto r = minimality_report(eb, eb.measure(), infinity_norm);
    CHECK(std::abs(r.lead_slope.back()) < 0.05);
    for (int n = 1; n <= 32; ++n)
        CHECK(boundary_sup(e, [&](cplx z) { return eb.value(n, z); }) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minimality report examples") {
    const auto circ = orthonormal_basis(default_measure(Support::circle(1.0), 16), 16);
    const auto r = minimality_report(circ, circ.measure(), 2.0);
    for (std::size_t k = 0; k < r.n.size(); ++k) {
        CHECK(r.window[k] == std::min(r.n[k], default_window(r.n[k])));
        if (r.window[k] >= 1) CHECK(std::isinf(r.near_lead_slope[k]));
    }
    const auto cheb = lp_minimal_basis(default_measure(Support::interval(-2.0, 2.0), 16), infinity_norm, 16);
    const auto rc = minimality_report(cheb, cheb.measure(), infinity_norm, 0);
    for (std::size_t k = 0; k < rc.n.size(); ++k) {
        CHECK(rc.near_lead_slope[k] == doctest::Approx(std::log(2.0) / rc.n[k]).epsilon(1e-6));
        CHECK(rc.near_lead_slope[k] >= 0.0);
    }
    CHECK_THROWS_AS(minimality_report(orthonormal_basis(default_measure(Support::circle(1.0), 4), 4),
                                      default_measure(Support::circle(1.0), 4), 2.0),
                    ValidationError);
}

TEST_CASE("basis json round trip validates coefficients") {
    const auto b = faber_basis(Support::ellipse(1.25, 0.75), 10);
    const auto j = b.to_json();
    const auto c = Basis::from_json(j);
    for (int n = 0; n <= 10; ++n)
        for (int k = 0; k <= n; ++k) CHECK(std::abs(b.coeff(n, k) - c.coeff(n, k)) < 1e-12);
    auto bad = j;
    bad["coeffs"][3][0] = bad["coeffs"][3][0].get<double>() + 1.0;
    CHECK_THROWS_AS(Basis::from_json(bad), ValidationError);
}
