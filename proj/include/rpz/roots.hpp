#pragma once

// Zeros of polynomials whose coefficients span thousands of orders of
// magnitude. The Newton polygon of (k, log|zeta_k|) is split where adjacent
// slopes differ by more than split_gap; each piece is rescaled by an exact
// power of two and solved by Aberth-Ehrlich iteration with exponent-tracking
// Horner evaluation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpz/error.hpp"
#include "rpz/scaled_complex.hpp"
#include "rpz/support.hpp"

namespace rpz {

struct RootOptions {
    double tolerance = 1e-12;
    int max_sweeps = 500;
    int polish_sweeps = 2;
    /// Slope gap (natural log) at which the Newton polygon is split.
    double split_gap = 40.0;
};

struct RootResult {
    /// Roots as doubles; moduli beyond exp(+-700) are clamped (see saturated).
    std::vector<cplx> roots;
    /// Exact roots.
    std::vector<ScaledComplex> scaled;
    /// |p(z)| / sum |zeta_k||z|^k per root.
    std::vector<double> residual;
    int iterations = 0;
    /// Binary exponent divided out of the coefficients.
    std::int64_t rescale_exponent = 0;
    int saturated = 0;
    int groups = 0;
    int degree = 0;

    double max_residual() const;
};

class RootError : public Error {
public:
    RootError(const std::string& what, RootResult partial) : Error(what), partial(std::move(partial)) {}
    RootResult partial;
};

/// All zeros of sum zeta_k z^k. Trailing zero coefficients are trimmed; an
/// all-zero input raises ValidationError; degree 0 gives an empty result.
RootResult roots(std::span<const ScaledComplex> zeta, const RootOptions& opts = {});
RootResult roots(std::span<const cplx> zeta, const RootOptions& opts = {});

/// Eigenvalues of the balanced companion matrix (degree <= 64).
std::vector<cplx> roots_companion(std::span<const ScaledComplex> zeta);
std::vector<cplx> roots_companion(std::span<const cplx> zeta);

struct VietaReport {
    int degree = 0;
    ScaledComplex sum;       // sum of roots
    ScaledComplex expected_sum;
    double sum_error = 0.0;  // |sum - expected| / max(sum |z_i|, |expected|)
    double log_abs_product = 0.0;
    double expected_log_abs_product = 0.0;
    double log_abs_error = 0.0;  // relative to max(1, |expected|)
    double arg_error = 0.0;      // wrapped to [0, pi]
    bool flagged = false;        // any error > tolerance
};

VietaReport vieta_check(std::span<const ScaledComplex> zeta, std::span<const ScaledComplex> roots,
                        double tolerance = 1e-6);
VietaReport vieta_check(std::span<const cplx> zeta, std::span<const cplx> roots, double tolerance = 1e-6);

/// Horner in double-double arithmetic, rounded to double.
cplx horner_compensated(std::span<const cplx> zeta, cplx z);

/// Smallest achievable largest distance over one-to-one matchings of two multisets.
double matched_distance(std::span<const cplx> a, std::span<const cplx> b);

struct EmpiricalMeasure {
    std::vector<cplx> points;
    int count = 0;
};

/// Wraps roots with the normalizer D_n; |roots| must equal D_n.
EmpiricalMeasure zero_measure(std::vector<cplx> roots, int D_n);

}  // namespace rpz
