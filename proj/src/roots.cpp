#include "rpz/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace rpz {

namespace {

constexpr double ln2 = std::numbers::ln2;
constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double saturation_log = 700.0;

// Exponent-tracked accumulator: value = b * 2^e.
struct Acc {
    cplx b{0.0, 0.0};
    std::int64_t e = 0;

    bool zero() const { return b.real() == 0.0 && b.imag() == 0.0; }

    double log_abs() const {
        if (zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(b)) + static_cast<double>(e) * ln2;
    }

    void renorm() {
        const double m = std::max(std::abs(b.real()), std::abs(b.imag()));
        if (m == 0.0) {
            e = 0;
            return;
        }
        if (m > 0x1.0p300 || m < 0x1.0p-300) {
            const int k = std::ilogb(m);
            b = {std::scalbn(b.real(), -k), std::scalbn(b.imag(), -k)};
            e += k;
        }
    }

    void mul(cplx wm, std::int64_t we) {
        b *= wm;
        e += we;
        renorm();
    }

    void add(cplx m, std::int64_t me) {
        if (m.real() == 0.0 && m.imag() == 0.0) return;
        if (zero()) {
            b = m;
            e = me;
            return;
        }
        const std::int64_t d = me - e;
        if (d > 0) {
            b = d > 1200 ? cplx(0.0, 0.0) : cplx(std::scalbn(b.real(), static_cast<int>(-d)), std::scalbn(b.imag(), static_cast<int>(-d)));
            b += m;
            e = me;
        } else if (d >= -1200) {
            b += cplx(std::scalbn(m.real(), static_cast<int>(d)), std::scalbn(m.imag(), static_cast<int>(d)));
        }
        renorm();
    }

    void add(const Acc& o) { add(o.b, o.e); }
};

cplx scale2(cplx z, std::int64_t k) {
    const int s = static_cast<int>(std::clamp<std::int64_t>(k, -2200, 2200));
    return {std::scalbn(z.real(), s), std::scalbn(z.imag(), s)};
}

// Split w into mantissa in [1,2) (max component) and exponent.
void split(cplx w, cplx& wm, std::int64_t& we) {
    const double m = std::max(std::abs(w.real()), std::abs(w.imag()));
    if (m == 0.0 || !std::isfinite(m)) {
        wm = w;
        we = 0;
        return;
    }
    const int k = std::ilogb(m);
    wm = scale2(w, -k);
    we = k;
}

struct Eval {
    Acc p, dp, beta;
};

// Polynomial sum c_k w^k with c_k = m[k] * 2^ex[k].
struct ScaledPoly {
    std::vector<cplx> m;
    std::vector<std::int64_t> ex;
    std::vector<cplx> dbl;  // filled when every exponent is moderate
    bool fast = false;

    int degree() const { return static_cast<int>(m.size()) - 1; }

    void prepare() {
        fast = true;
        for (std::size_t k = 0; k < m.size(); ++k)
            if (m[k] != cplx(0.0, 0.0) && (ex[k] < -900 || ex[k] > 2)) fast = false;
        if (fast) {
            dbl.resize(m.size());
            for (std::size_t k = 0; k < m.size(); ++k) dbl[k] = scale2(m[k], ex[k]);
        }
    }

    Eval eval(cplx w) const {
        const int n = degree();
        Eval out;
        const double aw = std::abs(w);
        if (fast && aw > 0.0 && std::abs(std::log2(aw)) * n <= 100.0) {
            cplx p = dbl[n], dp = 0.0;
            double beta = std::abs(dbl[n]);
            for (int k = n - 1; k >= 0; --k) {
                dp = dp * w + p;
                p = p * w + dbl[k];
                beta = beta * aw + std::abs(dbl[k]);
            }
            out.p.b = p;
            out.dp.b = dp;
            out.beta.b = beta;
            out.p.renorm();
            out.dp.renorm();
            out.beta.renorm();
            return out;
        }
        cplx wm;
        std::int64_t we;
        split(w, wm, we);
        const double awm = std::abs(wm);
        out.p.add(m[n], ex[n]);
        out.beta.add(std::abs(m[n]), ex[n]);
        for (int k = n - 1; k >= 0; --k) {
            out.dp.mul(wm, we);
            out.dp.add(out.p);
            out.p.mul(wm, we);
            out.p.add(m[k], ex[k]);
            out.beta.mul(awm, we);
            out.beta.add(std::abs(m[k]), ex[k]);
        }
        return out;
    }
};

// p'/p as a double (may be 0 or inf).
cplx log_derivative(const Eval& ev) {
    if (ev.dp.zero()) return 0.0;
    return scale2(ev.dp.b / ev.p.b, ev.dp.e - ev.p.e);
}

struct Group {
    int lo = 0, hi = 0;           // coefficient indices of the piece
    std::int64_t sigma = 0;       // z = 2^sigma w
    std::vector<int> vertices;    // hull vertices lo..hi
};

std::vector<int> upper_hull(const std::vector<double>& L, int lo, int hi) {
    std::vector<int> h;
    for (int k = lo; k <= hi; ++k) {
        if (!std::isfinite(L[k])) continue;
        while (h.size() >= 2) {
            const int a = h[h.size() - 2], b = h.back();
            const double cross = (b - a) * (L[k] - L[a]) - (L[b] - L[a]) * (k - a);
            if (cross >= 0.0)
                h.pop_back();
            else
                break;
        }
        h.push_back(k);
    }
    return h;
}

double slope(const std::vector<double>& L, int a, int b) { return (L[b] - L[a]) / (b - a); }

std::vector<Group> split_groups(const std::vector<double>& L, const std::vector<int>& hull, double gap) {
    // Cut indices into hull: cut before edge e when slope drops by more than gap.
    std::vector<std::size_t> cuts{0};
    for (std::size_t e = 1; e + 1 < hull.size(); ++e)
        if (slope(L, hull[e - 1], hull[e]) - slope(L, hull[e], hull[e + 1]) > gap) cuts.push_back(e);
    cuts.push_back(hull.size() - 1);

    // Pieces whose root radii span more than the double range get cut again at their widest gap.
    constexpr double max_range = 1300.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t g = 0; g + 1 < cuts.size(); ++g) {
            const std::size_t a = cuts[g], b = cuts[g + 1];
            if (b - a < 2) continue;
            const double range = slope(L, hull[a], hull[a + 1]) - slope(L, hull[b - 1], hull[b]);
            if (range <= max_range) continue;
            std::size_t best = a + 1;
            double best_gap = -1.0;
            for (std::size_t e = a + 1; e < b; ++e) {
                const double d = slope(L, hull[e - 1], hull[e]) - slope(L, hull[e], hull[e + 1]);
                if (d > best_gap) {
                    best_gap = d;
                    best = e;
                }
            }
            cuts.insert(cuts.begin() + static_cast<long>(g) + 1, best);
            changed = true;
            break;
        }
    }

    std::vector<Group> groups;
    for (std::size_t g = 0; g + 1 < cuts.size(); ++g) {
        Group gr;
        gr.lo = hull[cuts[g]];
        gr.hi = hull[cuts[g + 1]];
        for (std::size_t e = cuts[g]; e <= cuts[g + 1]; ++e) gr.vertices.push_back(hull[e]);
        const double mean_log_radius = -slope(L, gr.lo, gr.hi);
        gr.sigma = static_cast<std::int64_t>(std::llround(mean_log_radius / ln2));
        groups.push_back(std::move(gr));
    }
    return groups;
}

ScaledPoly group_poly(std::span<const ScaledComplex> zeta, const Group& g) {
    ScaledPoly q;
    const int m = g.hi - g.lo;
    q.m.resize(m + 1);
    q.ex.resize(m + 1);
    std::int64_t top = std::numeric_limits<std::int64_t>::min();
    for (int t = 0; t <= m; ++t) {
        const auto& c = zeta[g.lo + t];
        q.m[t] = c.mant;
        q.ex[t] = c.exp2 + g.sigma * t;
        if (!c.is_zero()) top = std::max(top, q.ex[t]);
    }
    for (int t = 0; t <= m; ++t) q.ex[t] = q.m[t] == cplx(0.0, 0.0) ? 0 : q.ex[t] - top;
    q.prepare();
    return q;
}

struct GroupSolve {
    std::vector<cplx> w;
    int sweeps = 0;
    bool converged = true;
};

GroupSolve aberth(const ScaledPoly& q, const std::vector<double>& L, const Group& g, const RootOptions& opts) {
    const int m = q.degree();
    GroupSolve out;
    out.w.reserve(m);
    for (std::size_t e = 0; e + 1 < g.vertices.size(); ++e) {
        const int a = g.vertices[e], b = g.vertices[e + 1];
        const double log_r = -slope(L, a, b) - static_cast<double>(g.sigma) * ln2;
        const double r = std::exp(std::clamp(log_r, -saturation_log, saturation_log));
        const int cnt = b - a;
        for (int k = 0; k < cnt; ++k)
            out.w.push_back(std::polar(r, 2.0 * std::numbers::pi * k / cnt + 0.3));
    }
    if (m == 1) {
        out.w[0] = -scale2(q.m[0] / q.m[1], q.ex[0] - q.ex[1]);
        return out;
    }

    std::vector<char> done(m, 0);
    const double backward = 8.0 * eps * (m + 1);
    int remaining = m, polish = 0;
    while (true) {
        if (out.sweeps >= opts.max_sweeps) {
            out.converged = false;
            break;
        }
        ++out.sweeps;
        const bool polishing = remaining == 0;
        for (int i = 0; i < m; ++i) {
            if (done[i] && !polishing) continue;
            const cplx wi = out.w[i];
            const Eval ev = q.eval(wi);
            if (ev.p.zero()) {
                if (!done[i]) --remaining;
                done[i] = 1;
                continue;
            }
            cplx s = 0.0;
            for (int j = 0; j < m; ++j)
                if (j != i && out.w[j] != wi) s += 1.0 / (wi - out.w[j]);
            const cplx q_ratio = log_derivative(ev);
            cplx corr = 1.0 / (q_ratio - s);
            if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) {
                corr = 1.0 / q_ratio;
                if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) corr = 0.0;
            }
            const cplx next = wi - corr;
            if (std::isfinite(next.real()) && std::isfinite(next.imag())) out.w[i] = next;
            const bool small_step = std::abs(corr) <= opts.tolerance * std::abs(out.w[i]);
            const bool at_noise = ev.p.log_abs() <= std::log(backward) + ev.beta.log_abs();
            if (!done[i] && (small_step || at_noise)) {
                done[i] = 1;
                --remaining;
            }
        }
        if (polishing && ++polish >= opts.polish_sweeps) break;
    }
    return out;
}

}  // namespace

double RootResult::max_residual() const {
    double r = 0.0;
    for (double x : residual) r = std::max(r, x);
    return r;
}

RootResult roots(std::span<const ScaledComplex> zeta_in, const RootOptions& opts) {
    int D = static_cast<int>(zeta_in.size()) - 1;
    while (D >= 0 && zeta_in[D].is_zero()) --D;
    if (D < 0) throw ValidationError("roots: all coefficients are zero");

    RootResult res;
    res.degree = D;
    std::int64_t top = std::numeric_limits<std::int64_t>::min();
    for (int k = 0; k <= D; ++k)
        if (!zeta_in[k].is_zero()) top = std::max(top, zeta_in[k].exp2);
    res.rescale_exponent = top;
    std::vector<ScaledComplex> zeta(D + 1);
    std::vector<double> L(D + 1);
    for (int k = 0; k <= D; ++k) {
        zeta[k] = zeta_in[k];
        if (!zeta[k].is_zero()) zeta[k].exp2 -= top;
        L[k] = zeta[k].log_abs();
    }
    if (D == 0) return res;

    int lo = 0;
    while (zeta[lo].is_zero()) ++lo;
    for (int k = 0; k < lo; ++k) res.scaled.emplace_back();

    bool ok = true;
    if (lo < D) {
        const auto hull = upper_hull(L, lo, D);
        const auto groups = split_groups(L, hull, opts.split_gap);
        res.groups = static_cast<int>(groups.size());
        for (const auto& g : groups) {
            const ScaledPoly q = group_poly(zeta, g);
            const GroupSolve s = aberth(q, L, g, opts);
            res.iterations = std::max(res.iterations, s.sweeps);
            ok = ok && s.converged;
            for (const cplx& w : s.w) res.scaled.emplace_back(w, g.sigma);
        }
    }

    // Residuals against the full (normalized) polynomial.
    ScaledPoly full;
    full.m.resize(D + 1);
    full.ex.resize(D + 1);
    for (int k = 0; k <= D; ++k) {
        full.m[k] = zeta[k].mant;
        full.ex[k] = zeta[k].exp2;
    }
    for (const auto& z : res.scaled) {
        if (z.is_zero()) {
            res.residual.push_back(0.0);
            res.roots.emplace_back(0.0, 0.0);
            continue;
        }
        // Horner with the scaled argument.
        Acc p, beta;
        p.add(full.m[D], full.ex[D]);
        beta.add(std::abs(full.m[D]), full.ex[D]);
        const double am = std::abs(z.mant);
        for (int k = D - 1; k >= 0; --k) {
            p.mul(z.mant, z.exp2);
            p.add(full.m[k], full.ex[k]);
            beta.mul(am, z.exp2);
            beta.add(std::abs(full.m[k]), full.ex[k]);
        }
        res.residual.push_back(p.zero() ? 0.0 : std::exp(p.log_abs() - beta.log_abs()));
        const double la = z.log_abs();
        if (std::abs(la) > saturation_log) {
            ++res.saturated;
            res.roots.push_back(std::polar(std::exp(std::copysign(saturation_log, la)), z.arg()));
        } else {
            res.roots.push_back(z.to_complex());
        }
    }
    if (!ok) throw RootError("roots: no convergence within " + std::to_string(opts.max_sweeps) + " sweeps", res);
    return res;
}

RootResult roots(std::span<const cplx> zeta, const RootOptions& opts) {
    std::vector<ScaledComplex> s(zeta.begin(), zeta.end());
    return roots(std::span<const ScaledComplex>(s), opts);
}

std::vector<cplx> roots_companion(std::span<const cplx> zeta) {
    int D = static_cast<int>(zeta.size()) - 1;
    while (D >= 0 && zeta[D] == cplx(0.0, 0.0)) --D;
    if (D < 0) throw ValidationError("roots_companion: all coefficients are zero");
    if (D > 64) throw CapabilityError("roots_companion supports degree <= 64, got " + std::to_string(D));
    if (D == 0) return {};
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(D, D);
    for (int k = 0; k < D; ++k) {
        const cplx c = -zeta[D - 1 - k] / zeta[D];
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw ValidationError("roots_companion: coefficients not representable in double");
        A(0, k) = c;
    }
    for (int k = 1; k < D; ++k) A(k, k - 1) = 1.0;

    // Parlett-Reinsch balancing with radix 2.
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < D; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < D; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0, g = r / 2.0;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c > g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                A.row(i) /= f;
                A.col(i) *= f;
            }
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
    if (es.info() != Eigen::Success) throw Error("roots_companion: eigenvalue iteration failed");
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<cplx> roots_companion(std::span<const ScaledComplex> zeta) {
    std::int64_t top = std::numeric_limits<std::int64_t>::min();
    for (const auto& c : zeta)
        if (!c.is_zero()) top = std::max(top, c.exp2);
    std::vector<cplx> z;
    for (const auto& c : zeta) z.push_back(c.is_zero() ? cplx(0.0, 0.0) : ScaledComplex(c.mant, c.exp2 - top).to_complex());
    return roots_companion(std::span<const cplx>(z));
}

namespace {

ScaledComplex neg(ScaledComplex a) {
    a.mant = -a.mant;
    return a;
}

ScaledComplex divide(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero()) return {};
    return {a.mant / b.mant, a.exp2 - b.exp2};
}

double log_abs_sum(std::span<const ScaledComplex> zs) {
    ScaledComplex acc;
    for (const auto& z : zs) acc += ScaledComplex(std::abs(z.mant), z.exp2);
    return acc.log_abs();
}

}  // namespace

VietaReport vieta_check(std::span<const ScaledComplex> zeta, std::span<const ScaledComplex> rts, double tolerance) {
    int D = static_cast<int>(zeta.size()) - 1;
    while (D >= 0 && zeta[D].is_zero()) --D;
    if (D < 0) throw ValidationError("vieta_check: all coefficients are zero");
    if (static_cast<int>(rts.size()) != D)
        throw ValidationError("vieta_check: expected " + std::to_string(D) + " roots, got " + std::to_string(rts.size()));
    VietaReport r;
    r.degree = D;
    if (D == 0) return r;

    for (const auto& z : rts) r.sum += z;
    r.expected_sum = neg(divide(zeta[D - 1], zeta[D]));
    const double scale = std::max(log_abs_sum(rts), r.expected_sum.log_abs());
    const ScaledComplex diff = r.sum + neg(r.expected_sum);
    r.sum_error = (diff.is_zero() || !std::isfinite(scale)) ? 0.0 : std::exp(diff.log_abs() - scale);

    double arg_sum = 0.0;
    for (const auto& z : rts) {
        r.log_abs_product += z.log_abs();
        arg_sum += z.arg();
    }
    r.expected_log_abs_product = zeta[0].log_abs() - zeta[D].log_abs();
    if (zeta[0].is_zero()) {
        const bool has_zero = std::any_of(rts.begin(), rts.end(), [](const ScaledComplex& z) { return z.is_zero(); });
        r.log_abs_error = has_zero ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        r.log_abs_error = std::abs(r.log_abs_product - r.expected_log_abs_product) /
                          std::max(1.0, std::abs(r.expected_log_abs_product));
        const double expected_arg = zeta[0].arg() - zeta[D].arg() + D * std::numbers::pi;
        r.arg_error = std::abs(std::remainder(arg_sum - expected_arg, 2.0 * std::numbers::pi));
    }
    r.flagged = !(r.sum_error <= tolerance && r.log_abs_error <= tolerance && r.arg_error <= tolerance);
    return r;
}

VietaReport vieta_check(std::span<const cplx> zeta, std::span<const cplx> rts, double tolerance) {
    std::vector<ScaledComplex> a(zeta.begin(), zeta.end()), b(rts.begin(), rts.end());
    return vieta_check(std::span<const ScaledComplex>(a), std::span<const ScaledComplex>(b), tolerance);
}

namespace {

struct DD {
    double hi = 0.0, lo = 0.0;
};

DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return two_sum(s.hi, s.lo);
}

DD dd_mul(DD a, double b) {
    const double p = a.hi * b;
    const double e = std::fma(a.hi, b, -p);
    return two_sum(p, e + a.lo * b);
}

DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

}  // namespace

cplx horner_compensated(std::span<const cplx> zeta, cplx z) {
    if (zeta.empty()) return 0.0;
    DD re{zeta.back().real(), 0.0}, im{zeta.back().imag(), 0.0};
    for (std::size_t k = zeta.size() - 1; k-- > 0;) {
        const DD nr = dd_add(dd_mul(re, z.real()), dd_neg(dd_mul(im, z.imag())));
        const DD ni = dd_add(dd_mul(re, z.imag()), dd_mul(im, z.real()));
        re = dd_add(nr, DD{zeta[k].real(), 0.0});
        im = dd_add(ni, DD{zeta[k].imag(), 0.0});
    }
    return {re.hi + re.lo, im.hi + im.lo};
}

namespace {

// Kuhn augmenting path over the edges with distance <= limit.
bool augment(int i, double limit, const std::vector<double>& d, int n, std::vector<int>& match,
             std::vector<char>& seen) {
    for (int j = 0; j < n; ++j) {
        if (seen[j] || d[static_cast<std::size_t>(i) * n + j] > limit) continue;
        seen[j] = 1;
        if (match[j] < 0 || augment(match[j], limit, d, n, match, seen)) {
            match[j] = i;
            return true;
        }
    }
    return false;
}

bool perfect_within(double limit, const std::vector<double>& d, int n) {
    std::vector<int> match(n, -1);
    std::vector<char> seen(n);
    for (int i = 0; i < n; ++i) {
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(i, limit, d, n, match, seen)) return false;
    }
    return true;
}

}  // namespace

// Bottleneck matching: binary search over the sorted pair distances.
double matched_distance(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw ValidationError("matched_distance: sizes differ");
    const int n = static_cast<int>(a.size());
    if (n == 0) return 0.0;
    std::vector<double> d(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(i) * n + j] = std::abs(a[i] - b[j]);
    std::vector<double> sorted(d);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::size_t lo = 0, hi = sorted.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (perfect_within(sorted[mid], d, n)) hi = mid;
        else lo = mid + 1;
    }
    return sorted[lo];
}

EmpiricalMeasure zero_measure(std::vector<cplx> rts, int D_n) {
    if (static_cast<int>(rts.size()) != D_n)
        throw ValidationError("zero_measure: " + std::to_string(rts.size()) + " roots for D_n = " + std::to_string(D_n));
    return {std::move(rts), D_n};
}

}  // namespace rpz
