#include "rpz/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/lambert_w.hpp>

#include "rpz/error.hpp"
#include "rpz/kernels.hpp"
#include "rpz/parallel.hpp"

namespace rpz {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct NameEntry {
    DistributionName name;
    const char* text;
};

constexpr NameEntry names[] = {
    {DistributionName::gaussian, "gaussian"},           {DistributionName::uniform_disk, "uniform_disk"},
    {DistributionName::two_point, "two_point"},         {DistributionName::log_light, "log_light"},
    {DistributionName::log_intermediate, "log_intermediate"}, {DistributionName::log_heavy, "log_heavy"},
};

bool is_log_family(DistributionName n) {
    return n == DistributionName::log_intermediate || n == DistributionName::log_heavy;
}

}  // namespace

std::string to_string(DistributionName name) {
    for (const auto& e : names)
        if (e.name == name) return e.text;
    return "unknown";
}

CoefficientDistribution::CoefficientDistribution(DistributionName name, double s0) : name_(name), s0_(s0) {
    if (is_log_family(name) && !(s0 > 1.0 && std::isfinite(s0)))
        throw ValidationError("s0 must be a finite number > 1, got " + std::to_string(s0));
}

double CoefficientDistribution::tail(double s) const {
    switch (name_) {
        case DistributionName::gaussian:
        case DistributionName::log_light:
            return std::exp(-std::exp(2.0 * s));
        case DistributionName::uniform_disk:
            return s < 0.0 ? 1.0 - std::exp(2.0 * s) : 0.0;
        case DistributionName::two_point:
            return s < 0.0 ? 1.0 : 0.0;
        case DistributionName::log_intermediate:
            return s <= s0_ ? 1.0 : (s0_ * std::log(s0_)) / (s * std::log(s));
        case DistributionName::log_heavy:
            return s <= s0_ ? 1.0 : s0_ / s;
    }
    return 0.0;
}

bool CoefficientDistribution::log_moment_finite() const { return !is_log_family(name_); }

bool CoefficientDistribution::in_prob_condition() const { return name_ != DistributionName::log_heavy; }

// Lanes: 0,1 modulus (or gaussian pair via normals on lanes 0..3), 4 phase.
double CoefficientDistribution::sample_log_abs(const CounterRng& rng, std::uint64_t index) const {
    switch (name_) {
        case DistributionName::gaussian: {
            const double re = rng.normal(index, 0), im = rng.normal(index, 1);
            return 0.5 * std::log(0.5 * (re * re + im * im));
        }
        case DistributionName::log_light:
            return 0.5 * std::log(-std::log(rng.uniform(index, 0)));
        case DistributionName::uniform_disk:
            return 0.5 * std::log(rng.uniform(index, 0));
        case DistributionName::two_point:
            return 0.0;
        case DistributionName::log_intermediate: {
            const double y = s0_ * std::log(s0_) / rng.uniform(index, 0);
            return std::exp(boost::math::lambert_w0(y));
        }
        case DistributionName::log_heavy:
            return s0_ / rng.uniform(index, 0);
    }
    return 0.0;
}

ScaledComplex CoefficientDistribution::sample(const CounterRng& rng, std::uint64_t index) const {
    switch (name_) {
        case DistributionName::gaussian:
            return ScaledComplex(cplx(rng.normal(index, 0), rng.normal(index, 1)) * std::sqrt(0.5));
        case DistributionName::two_point:
            return ScaledComplex(cplx(rng.uniform(index, 4) < 0.5 ? -1.0 : 1.0, 0.0));
        default:
            return ScaledComplex::from_log_polar(sample_log_abs(rng, index), two_pi * rng.uniform(index, 4));
    }
}

nlohmann::json CoefficientDistribution::to_json() const {
    nlohmann::json j{{"name", to_string(name_)}};
    if (is_log_family(name_)) j["s0"] = s0_;
    return j;
}

CoefficientDistribution make_distribution(const std::string& name, double s0) {
    for (const auto& e : names)
        if (name == e.text) return CoefficientDistribution(e.name, s0);
    throw ValidationError("unknown distribution '" + name + "'");
}

CoefficientDistribution distribution_from_json(const nlohmann::json& spec) {
    if (spec.is_string()) return make_distribution(spec.get<std::string>());
    if (!spec.is_object() || !spec.contains("name") || !spec["name"].is_string())
        throw ValidationError("distribution spec needs a string 'name'");
    const double s0 = spec.contains("s0") ? spec["s0"].get<double>() : 3.0;
    return make_distribution(spec["name"].get<std::string>(), s0);
}

RandomPolynomial make_random_polynomial(const Basis& basis, std::vector<ScaledComplex> xi) {
    const int n = static_cast<int>(xi.size()) - 1;
    if (n < 0) throw ValidationError("need at least one coefficient");
    if (n > basis.degree_max())
        throw ValidationError("degree " + std::to_string(n) + " exceeds basis degree " +
                              std::to_string(basis.degree_max()));
    RandomPolynomial g;
    g.n = n;
    g.xi = std::move(xi);
    g.zeta.assign(n + 1, ScaledComplex{});
    for (int j = 0; j <= n; ++j) {
        if (g.xi[j].is_zero()) continue;
        g.D_n = j;
        const auto& row = basis.coeffs()[j];
        for (int i = 0; i <= j; ++i)
            if (row[i] != cplx(0.0, 0.0)) g.zeta[i] += g.xi[j] * row[i];
    }
    return g;
}

RandomPolynomial sample_G(const Basis& basis, const CoefficientDistribution& dist, int n, std::uint64_t seed) {
    if (n < 0 || n > basis.degree_max())
        throw ValidationError("n = " + std::to_string(n) + " outside [0, " + std::to_string(basis.degree_max()) + "]");
    const CounterRng rng(seed);
    std::vector<ScaledComplex> xi(n + 1);
    for (int j = 0; j <= n; ++j) xi[j] = dist.sample(rng, static_cast<std::uint64_t>(j));
    return make_random_polynomial(basis, std::move(xi));
}

ScaledComplex evaluate_G(const Basis& basis, const RandomPolynomial& g, cplx z) {
    std::vector<cplx> p(basis.degree_max() + 1);
    basis.evaluate(z, p);
    ScaledComplex acc;
    for (int j = 0; j <= g.n; ++j)
        if (!g.xi[j].is_zero()) acc += g.xi[j] * p[j];
    return acc;
}

double max_log_stat(std::span<const ScaledComplex> xi) {
    if (xi.empty()) throw ValidationError("max_log_stat needs n >= 1");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& x : xi) best = std::max(best, x.log_abs());
    if (best == -std::numeric_limits<double>::infinity())
        throw UndefinedStatisticError("L_n undefined: all coefficients vanish");
    return best / static_cast<double>(xi.size());
}

double max_log_stat(std::span<const cplx> xi) {
    std::vector<ScaledComplex> s(xi.begin(), xi.end());
    return max_log_stat(std::span<const ScaledComplex>(s));
}

NearLeading near_leading_index(std::span<const ScaledComplex> zeta, int n) {
    if (n < 2) throw ValidationError("near_leading_index needs n >= 2");
    if (static_cast<int>(zeta.size()) < n + 1) throw ValidationError("zeta shorter than n + 1");
    const int lo = std::max(0, static_cast<int>(std::floor(n - std::pow(std::log(n), 2))));
    int best = -1;
    double best_log = -std::numeric_limits<double>::infinity();
    for (int j = n; j >= lo; --j) {
        const double l = zeta[j].log_abs();
        if (l > best_log) {
            best_log = l;
            best = j;
        }
    }
    if (best < 0) throw UndefinedStatisticError("near-leading window holds only zeros");
    return {n - best, best, zeta[best]};
}

bool event_A(std::span<const double> log_abs, int n, double c) {
    const int half = n / 2;
    const double dn = static_cast<double>(n);
    if (!(log_abs[half] >= (c + 1.0) * dn)) return false;
    for (int j = 0; j <= n; ++j)
        if (j != half && !(log_abs[j] < dn)) return false;
    return true;
}

bool event_B(std::span<const double> log_abs, int n, double c) {
    // The only candidate is the unique maximizer over 0..n.
    int arg = -1;
    double top = -std::numeric_limits<double>::infinity(), second = top;
    for (int i = 0; i <= n; ++i) {
        if (log_abs[i] > top) {
            second = top;
            top = log_abs[i];
            arg = i;
        } else if (log_abs[i] > second) {
            second = log_abs[i];
        }
    }
    if (arg < 0 || 4 * arg < n || 2 * arg > n) return false;
    return top - second >= c * static_cast<double>(n);
}

EventFrequency dominance_event_frequency(const CoefficientDistribution& dist, int n, double c, int trials,
                                         std::uint64_t seed) {
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (n < 1) throw ValidationError("n must be >= 1");
    long long hits_a = 0, hits_b = 0;
#pragma omp parallel num_threads(workers())
    {
        std::vector<double> la(n + 1);
#pragma omp for reduction(+ : hits_a, hits_b) schedule(static)
        for (int t = 0; t < trials; ++t) {
            const CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(t), "coefficients"));
            for (int j = 0; j <= n; ++j) la[j] = dist.sample_log_abs(rng, static_cast<std::uint64_t>(j));
            hits_a += event_A(la, n, c) ? 1 : 0;
            hits_b += event_B(la, n, c) ? 1 : 0;
        }
    }
    return {static_cast<double>(hits_a) / trials, static_cast<double>(hits_b) / trials};
}

std::uint64_t spike_counter(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed) {
    if (!(eps > 0.0)) throw ValidationError("eps must be positive");
    return kernels::omp::spike_count(dist, N, eps, seed);
}

}  // namespace rpz
