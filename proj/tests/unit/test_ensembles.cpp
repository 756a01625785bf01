#include <doctest.h>

#include <cmath>

#include "rpz/ensembles.hpp"
#include "rpz/experiment.hpp"

using namespace rpz;

namespace {

const std::vector<std::string> all_names = {"gaussian", "uniform_disk", "two_point", "log_light", "log_intermediate",
                                            "log_heavy"};

Basis circle_monomials(int N) {
    return orthonormal_basis(reference_measure(Support::circle(1.0), MeasureDensity::uniform_arclength, 2 * N + 8), N);
}

// Closed-form P(L_n > eps) for i.i.d. coefficients xi_1..xi_n.
double ln_exceed_prob(const CoefficientDistribution& d, double n, double eps) {
    return -std::expm1(n * std::log1p(-d.tail(eps * n)));
}

}  // namespace

TEST_CASE("distribution flags") {
    CHECK(make_distribution("gaussian").log_moment_finite());
    CHECK(make_distribution("gaussian").in_prob_condition());
    CHECK(make_distribution("log_light").log_moment_finite());
    CHECK(make_distribution("log_light").in_prob_condition());
    CHECK_FALSE(make_distribution("log_intermediate").log_moment_finite());
    CHECK(make_distribution("log_intermediate").in_prob_condition());
    CHECK_FALSE(make_distribution("log_heavy").log_moment_finite());
    CHECK_FALSE(make_distribution("log_heavy").in_prob_condition());
    CHECK_THROWS_AS(make_distribution("cauchy"), ValidationError);
    CHECK_THROWS_AS(distribution_from_json(nlohmann::json{{"s0", 3}}), ValidationError);
    CHECK(distribution_from_json(nlohmann::json{{"name", "log_heavy"}, {"s0", 5.0}}).s0() == 5.0);
}

TEST_CASE("tails are monotone probabilities consistent with the flags") {
    for (const auto& name : all_names) {
        const auto d = make_distribution(name);
        double prev = 1.0;
        double integral = 0.0;
        for (int k = -400; k <= 4000; ++k) {
            const double s = k * 0.05;
            const double t = d.tail(s);
            CHECK(t >= 0.0);
            CHECK(t <= 1.0);
            CHECK(t <= prev);
            prev = t;
            if (s >= 0.0) integral += 0.05 * t;
        }
        // Integral of the tail to s = 200: bounded only for the finite-log-moment laws.
        if (d.log_moment_finite()) CHECK(integral < 5.0);
        else CHECK(integral > 5.0);
        const double nt = 1e6 * d.tail(1e6);
        if (d.in_prob_condition()) CHECK(nt < 0.5);
        else CHECK(nt > 1.0);
    }
    const auto h = make_distribution("log_heavy");
    CHECK(h.tail(2.0) == 1.0);
    CHECK(h.tail(6.0) == doctest::Approx(0.5));
    const auto m = make_distribution("log_intermediate");
    CHECK(m.tail(9.0) == doctest::Approx(3.0 * std::log(3.0) / (9.0 * std::log(9.0))));
}

TEST_CASE("sampler matches the closed-form tail within 3 standard errors") {
    const int draws = 1000000;
    for (const auto& name : {"log_light", "log_intermediate", "log_heavy"}) {
        const auto d = make_distribution(name);
        const CounterRng rng(derive_seed(77, 0, name));
        for (double s : {2.0, 4.0, 8.0}) {
            long hits = 0;
            for (int i = 0; i < draws; ++i)
                if (d.sample_log_abs(rng, i) > s) ++hits;
            const double t = d.tail(s);
            const double se = std::max(std::sqrt(t * (1.0 - t) / draws), 1.0 / draws);
            INFO(name << " s=" << s);
            CHECK(std::abs(static_cast<double>(hits) / draws - t) <= 3.0 * se);
        }
    }
}

TEST_CASE("sample and sample_log_abs agree, phases are spread") {
    for (const auto& name : all_names) {
        const auto d = make_distribution(name);
        const CounterRng rng(5);
        double mean_re = 0.0;
        for (int i = 0; i < 4000; ++i) {
            const auto x = d.sample(rng, i);
            if (name != "two_point" && name != "gaussian")
                CHECK(x.log_abs() == doctest::Approx(d.sample_log_abs(rng, i)).epsilon(1e-12));
            mean_re += std::cos(x.arg());
        }
        CHECK(std::abs(mean_re / 4000) < 0.1);
    }
}

TEST_CASE("non-degeneracy within the first 100 draws") {
    for (const auto& name : all_names) {
        const auto d = make_distribution(name);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const CounterRng rng(seed);
            const cplx first = d.sample(rng, 0).to_complex();
            bool differs = false;
            for (int i = 1; i < 100 && !differs; ++i) differs = std::abs(d.sample(rng, i).to_complex() - first) > 1e-6;
            CHECK(differs);
        }
    }
}

TEST_CASE("sample_G is deterministic and exact on the monomial basis") {
    const auto b = circle_monomials(40);
    const auto d = make_distribution("log_heavy");
    const auto g1 = sample_G(b, d, 40, 1234);
    const auto g2 = sample_G(b, d, 40, 1234);
    REQUIRE(g1.xi.size() == 41);
    for (int j = 0; j <= 40; ++j) {
        CHECK(g1.xi[j] == g2.xi[j]);
        CHECK(g1.zeta[j] == g2.zeta[j]);
        CHECK((g1.zeta[j] + g1.xi[j] * cplx(-1.0)).log_abs() < g1.xi[j].log_abs() - 30.0);
    }
    CHECK(g1.D_n == 40);
    CHECK_THROWS_AS(sample_G(b, d, 41, 1), ValidationError);
}

TEST_CASE("forced coefficients: unit vectors, linearity, D_n") {
    const Support s = Support::ellipse(1.25, 0.75);
    const auto b = faber_basis(s, 16);
    const int n = 16;
    for (int k : {0, 5, 16}) {
        std::vector<ScaledComplex> xi(n + 1, ScaledComplex(0.0));
        xi[k] = ScaledComplex(1.0);
        const auto g = make_random_polynomial(b, xi);
        for (int i = 0; i <= n; ++i) {
            const cplx expect = i <= k ? b.coeff(k, i) : 0.0;
            CHECK(std::abs(g.zeta[i].to_complex() - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
        }
        CHECK(g.D_n == k);
        CHECK(std::abs(g.zeta[k].to_complex() - b.coeff(k, k)) < 1e-12 * std::abs(b.coeff(k, k)));
    }
    const CounterRng rng(3);
    std::vector<ScaledComplex> u(n + 1), v(n + 1), w(n + 1);
    for (int j = 0; j <= n; ++j) {
        u[j] = ScaledComplex(cplx(rng.normal(j, 0), rng.normal(j, 1)));
        v[j] = ScaledComplex(cplx(rng.normal(j, 2), rng.normal(j, 3)));
        w[j] = u[j] + v[j];
    }
    const auto gu = make_random_polynomial(b, u), gv = make_random_polynomial(b, v), gw = make_random_polynomial(b, w);
    double scale = 0.0;
    for (int i = 0; i <= n; ++i) scale = std::max(scale, std::abs(gw.zeta[i].to_complex()));
    for (int i = 0; i <= n; ++i)
        CHECK(std::abs(gw.zeta[i].to_complex() - gu.zeta[i].to_complex() - gv.zeta[i].to_complex()) <= 1e-12 * scale);
    // zeta recomputed by hand
    for (int i = 0; i <= n; ++i) {
        cplx acc = 0.0;
        for (int j = i; j <= n; ++j) acc += u[j].to_complex() * b.coeff(j, i);
        CHECK(std::abs(acc - gu.zeta[i].to_complex()) <= 1e-10 * std::max(1.0, std::abs(acc)));
    }
    std::vector<ScaledComplex> zero(n + 1, ScaledComplex(0.0));
    CHECK(make_random_polynomial(b, zero).D_n == -1);
}

TEST_CASE("evaluate_G matches the monomial form") {
    const auto b = orthonormal_basis(default_measure(Support::interval(-1.0, 1.0), 12), 12);
    const auto g = sample_G(b, make_distribution("gaussian"), 12, 8);
    for (cplx z : {cplx(0.3, 0.1), cplx(-0.9, 0.0), cplx(1.5, -0.5)}) {
        cplx mono = 0.0;
        for (int k = 12; k >= 0; --k) mono = mono * z + g.zeta[k].to_complex();
        CHECK(std::abs(evaluate_G(b, g, z).to_complex() - mono) < 1e-9 * std::max(1.0, std::abs(mono)));
    }
}

TEST_CASE("max_log_stat") {
    const std::vector<cplx> e = {std::exp(1.0), std::exp(2.0), std::exp(3.0)};
    CHECK(max_log_stat(std::span<const cplx>(e)) == doctest::Approx(1.0));
    const std::vector<cplx> ones = {cplx(1, 0), cplx(0, 1), std::polar(1.0, 2.0)};
    CHECK(std::abs(max_log_stat(std::span<const cplx>(ones))) < 1e-15);
    const std::vector<cplx> zeros(4, 0.0);
    CHECK_THROWS_AS(max_log_stat(std::span<const cplx>(zeros)), UndefinedStatisticError);
    const std::vector<ScaledComplex> big = {ScaledComplex::from_log_polar(5000.0, 0.0), ScaledComplex(1.0)};
    CHECK(max_log_stat(std::span<const ScaledComplex>(big)) == doctest::Approx(2500.0));
}

TEST_CASE("L_n along gaussian paths at n = 10^4") {
    const auto d = make_distribution("gaussian");
    const int n = 10000;
    int small = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const CounterRng rng(derive_seed(seed, 0, "coefficients"));
        double l = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= n; ++i) l = std::max(l, d.sample_log_abs(rng, i) / n);
        if (l <= 0.01) ++small;
    }
    CHECK(small >= 198);
}

TEST_CASE("P(L_n > 0.05) is nonincreasing in n") {
    for (const auto& name : {"gaussian", "log_intermediate"}) {
        const auto d = make_distribution(name);
        double prev = 1.0;
        for (int n : {100, 1000, 10000}) {
            int exceed = 0;
            const int trials = 200;
            for (int t = 0; t < trials; ++t) {
                const CounterRng rng(derive_seed(11, t, "coefficients"));
                double l = -std::numeric_limits<double>::infinity();
                for (int i = 1; i <= n; ++i) l = std::max(l, d.sample_log_abs(rng, i) / n);
                if (l > 0.05) ++exceed;
            }
            const double p = ln_exceed_prob(d, n, 0.05);
            const double emp = static_cast<double>(exceed) / trials;
            INFO(name << " n=" << n << " closed form " << p << " empirical " << emp);
            CHECK(std::abs(emp - p) <= 3.0 * std::sqrt(p * (1 - p) / trials) + 1.0 / trials);
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
        if (std::string(name) == "gaussian") CHECK(prev < 0.05);
    }
    // The intermediate law converges in probability only at the rate 1/log n.
    const auto m = make_distribution("log_intermediate");
    CHECK(ln_exceed_prob(m, 1e8, 0.05) < ln_exceed_prob(m, 1e4, 0.05));
    CHECK(ln_exceed_prob(m, 1e300, 0.05) < ln_exceed_prob(m, 1e100, 0.05));
    CHECK(ln_exceed_prob(m, 1e300, 0.05) < 0.1);
}

TEST_CASE("near_leading_index") {
    std::vector<ScaledComplex> z(11, ScaledComplex(0.0));
    z[10] = ScaledComplex(5.0);
    auto r = near_leading_index(z, 10);
    CHECK(r.index_gap == 0);
    CHECK(r.j == 10);
    z[9] = ScaledComplex(cplx(0.0, 5.0));
    r = near_leading_index(z, 10);
    CHECK(r.j == 10);
    z[9] = ScaledComplex(6.0);
    r = near_leading_index(z, 10);
    CHECK(r.j == 9);
    CHECK(r.index_gap == 1);
    std::vector<ScaledComplex> zero(11, ScaledComplex(0.0));
    zero[0] = ScaledComplex(1.0);  // outside the window
    CHECK_THROWS_AS(near_leading_index(zero, 10), UndefinedStatisticError);
}

TEST_CASE("near-leading coefficient of Kac polynomials") {
    const auto b = circle_monomials(100);
    const auto d = make_distribution("gaussian");
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto g = sample_G(b, d, 100, derive_seed(seed, 0, "coefficients"));
        const auto r = near_leading_index(g.zeta, 100);
        if (r.value.log_abs() / 100.0 >= -0.15) ++ok;
    }
    CHECK(ok >= 190);
}

TEST_CASE("events A and B on explicit coefficients") {
    const int n = 8;
    std::vector<double> la(n + 1, 0.0);
    la[4] = 9.0 * 3.0;  // (c + 1) n with c = 2
    CHECK(event_A(la, n, 2.0));
    CHECK(event_B(la, n, 2.0));
    la[1] = 8.5;
    CHECK_FALSE(event_A(la, n, 2.0));
    CHECK(event_B(la, n, 2.0));
    la[3] = 26.0;
    CHECK_FALSE(event_B(la, n, 2.0));
}

TEST_CASE("dominance event frequencies") {
    const auto g = make_distribution("gaussian");
    const auto f = dominance_event_frequency(g, 50, 1.0, 10000, 1);
    CHECK(f.freq_A == 0.0);
    CHECK(f.freq_B == 0.0);

    const auto h = make_distribution("log_heavy");
    const auto basis = circle_monomials(50);
    const auto cal = calibrate_c(basis, 50, NecessitySettings{});
    const auto fh = dominance_event_frequency(h, 50, cal.c, 10000, 2);
    CHECK(fh.freq_B >= 0.02);
    const auto again = dominance_event_frequency(h, 50, cal.c, 10000, 2);
    CHECK(again.freq_A == fh.freq_A);
    CHECK(again.freq_B == fh.freq_B);
}

TEST_CASE("spike counter separates the tail regimes") {
    CHECK(spike_counter(make_distribution("gaussian"), 1000000, 1.0, 4) == 0);

    const auto h = make_distribution("log_heavy");
    double expected = 0.0;
    for (int n = 1; n <= 100000; ++n) expected += std::min(1.0, 3.0 / n);
    std::uint64_t total = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) total += spike_counter(h, 100000, 1.0, seed);
    const double mean = static_cast<double>(total) / 50.0;
    CHECK(mean >= 0.5 * expected);
    CHECK(mean <= 2.0 * expected);

    const auto m = make_distribution("log_intermediate");
    std::uint64_t tm = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) tm += spike_counter(m, 1000000, 1.0, seed);
    CHECK(static_cast<double>(tm) / 50.0 >= 1.0);
}
