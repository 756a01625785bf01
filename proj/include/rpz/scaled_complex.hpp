#pragma once

// Complex numbers with an explicit binary exponent. Heavy-tailed coefficient
// laws produce moduli like e^(10^6), far outside the double range, and the
// root engine needs every coefficient of such polynomials without underflow.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rpz {

/// Value = mant * 2^exp2, with max(|re mant|, |im mant|) in [1, 2) unless zero.
struct ScaledComplex {
    std::complex<double> mant{0.0, 0.0};
    std::int64_t exp2 = 0;

    ScaledComplex() = default;

    ScaledComplex(std::complex<double> value) : mant(value) { normalize(); }

    ScaledComplex(std::complex<double> m, std::int64_t e) : mant(m), exp2(e) { normalize(); }

    /// Builds |z| = exp(log_abs), arg z = arg. log_abs = -inf gives zero.
    static ScaledComplex from_log_polar(double log_abs, double arg) {
        if (log_abs == -std::numeric_limits<double>::infinity()) return {};
        const double e = std::floor(log_abs / std::numbers::ln2);
        const double r = std::exp(log_abs - e * std::numbers::ln2);
        return {std::polar(r, arg), static_cast<std::int64_t>(e)};
    }

    bool is_zero() const { return mant.real() == 0.0 && mant.imag() == 0.0; }

    double log_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mant)) + static_cast<double>(exp2) * std::numbers::ln2;
    }

    double arg() const { return std::arg(mant); }

    /// May overflow to inf or underflow to 0 when the exponent is out of range.
    std::complex<double> to_complex() const {
        const double e = static_cast<double>(exp2);
        if (e > 2100) {
            const double inf = std::numeric_limits<double>::infinity();
            return {mant.real() == 0 ? 0.0 : std::copysign(inf, mant.real()),
                    mant.imag() == 0 ? 0.0 : std::copysign(inf, mant.imag())};
        }
        if (e < -2200) return {0.0, 0.0};
        const int ei = static_cast<int>(exp2);
        return {std::scalbn(mant.real(), ei), std::scalbn(mant.imag(), ei)};
    }

    void normalize() {
        const double m = std::max(std::abs(mant.real()), std::abs(mant.imag()));
        if (m == 0.0 || !std::isfinite(m)) {
            if (m == 0.0) exp2 = 0;
            return;
        }
        const int e = std::ilogb(m);
        mant = {std::scalbn(mant.real(), -e), std::scalbn(mant.imag(), -e)};
        exp2 += e;
    }

    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
        return {a.mant * b.mant, a.exp2 + b.exp2};
    }

    friend ScaledComplex operator*(const ScaledComplex& a, std::complex<double> b) {
        return a * ScaledComplex(b);
    }

    friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const std::int64_t e = std::max(a.exp2, b.exp2);
        return {shifted(a.mant, a.exp2 - e) + shifted(b.mant, b.exp2 - e), e};
    }

    ScaledComplex& operator+=(const ScaledComplex& other) { return *this = *this + other; }

    friend bool operator==(const ScaledComplex& a, const ScaledComplex& b) {
        return a.mant == b.mant && a.exp2 == b.exp2;
    }

    /// mant * 2^shift as a plain complex; shift <= 0 expected, deep shifts flush to zero.
    static std::complex<double> shifted(std::complex<double> m, std::int64_t shift) {
        if (shift < -1100) return {0.0, 0.0};
        const int s = static_cast<int>(shift);
        return {std::scalbn(m.real(), s), std::scalbn(m.imag(), s)};
    }
};

}  // namespace rpz
