#pragma once

// Coefficient laws, the random polynomials G_n = sum xi_j p_j, and the
// coefficient statistics that separate the convergence regimes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpz/bases.hpp"
#include "rpz/rng.hpp"
#include "rpz/scaled_complex.hpp"

namespace rpz {

enum class DistributionName { gaussian, uniform_disk, two_point, log_light, log_intermediate, log_heavy };

std::string to_string(DistributionName name);

class CoefficientDistribution {
public:
    explicit CoefficientDistribution(DistributionName name, double s0 = 3.0);

    DistributionName name() const { return name_; }
    double s0() const { return s0_; }

    /// T(s) = P(|xi| > e^s).
    double tail(double s) const;
    /// E log(1 + |xi|) < infinity.
    bool log_moment_finite() const;
    /// n T(n) -> 0.
    bool in_prob_condition() const;

    /// Draw number `index` of the stream keyed by rng.
    ScaledComplex sample(const CounterRng& rng, std::uint64_t index) const;
    /// log|xi| of the same draw, without forming the complex value.
    double sample_log_abs(const CounterRng& rng, std::uint64_t index) const;

    nlohmann::json to_json() const;

private:
    DistributionName name_;
    double s0_;
};

/// {name, optional s0}; unknown names raise ValidationError.
CoefficientDistribution distribution_from_json(const nlohmann::json& spec);
CoefficientDistribution make_distribution(const std::string& name, double s0 = 3.0);

struct RandomPolynomial {
    int n = 0;
    std::vector<ScaledComplex> xi;    // xi_0..xi_n
    std::vector<ScaledComplex> zeta;  // monomial coefficients zeta_{n,0..n}
    int D_n = -1;                     // max{j <= n : xi_j != 0}, -1 if all vanish
};

/// zeta_{n,i} = sum_{j >= i} xi_j a[j][i] for explicitly given xi_0..xi_n.
RandomPolynomial make_random_polynomial(const Basis& basis, std::vector<ScaledComplex> xi);

/// Deterministic given seed: xi_j is draw j of the stream keyed by seed.
RandomPolynomial sample_G(const Basis& basis, const CoefficientDistribution& dist, int n, std::uint64_t seed);

/// G_n(z) = sum xi_j p_j(z), evaluated through the stable basis recurrence.
ScaledComplex evaluate_G(const Basis& basis, const RandomPolynomial& g, cplx z);

/// L_n = max_{1<=i<=n} (1/n) log|xi_i| for xi_1..xi_n given in order.
double max_log_stat(std::span<const ScaledComplex> xi_1_to_n);
double max_log_stat(std::span<const cplx> xi_1_to_n);

struct NearLeading {
    int index_gap = 0;  // I_n
    int j = 0;          // n - I_n
    ScaledComplex value;
};

/// argmax of |zeta_j| over {floor(n - log^2 n), ..., n}, ties toward larger j.
NearLeading near_leading_index(std::span<const ScaledComplex> zeta, int n);

/// A_{n,c}: |xi_{n/2}| >= e^{(c+1)n} and |xi_j| < e^n otherwise.
bool event_A(std::span<const double> log_abs, int n, double c);
/// B_{n,c}: some j in [n/4, n/2] has |xi_j| >= e^{cn} |xi_i| for every other i <= n.
bool event_B(std::span<const double> log_abs, int n, double c);

struct EventFrequency {
    double freq_A = 0.0;
    double freq_B = 0.0;
};

EventFrequency dominance_event_frequency(const CoefficientDistribution& dist, int n, double c, int trials,
                                         std::uint64_t seed);

/// #{1 <= n <= N : (1/n) log|xi_n| > eps} along one coefficient path.
std::uint64_t spike_counter(const CoefficientDistribution& dist, std::uint64_t N, double eps, std::uint64_t seed);

}  // namespace rpz
