#include "rpz/bases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpz/detail/basis_build.hpp"

namespace rpz {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

double weighted_norm(const Eigen::VectorXcd& v, const std::vector<double>& w) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += w[i] * std::norm(v[i]);
    return std::sqrt(s);
}

cplx weighted_inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g, const std::vector<double>& w) {
    cplx s{0.0, 0.0};
    for (Eigen::Index i = 0; i < f.size(); ++i) s += w[i] * f[i] * std::conj(g[i]);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// OrthonormalSystem

OrthonormalSystem::OrthonormalSystem(DiscretizedMeasure measure, int max_degree)
    : measure_(std::move(measure)), max_degree_(max_degree) {
    if (max_degree < 0) throw ValidationError("max_degree must be nonnegative");
    const auto m = static_cast<Eigen::Index>(measure_.size());
    if (measure_.exactness_degree < 2 * max_degree || m < max_degree + 1)
        throw RankError("quadrature with exactness " + std::to_string(measure_.exactness_degree) + " and " +
                        std::to_string(m) + " nodes cannot support degree " + std::to_string(max_degree));
    const auto& w = measure_.weights;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);

    q_.resize(m, max_degree + 1);
    q_.col(0).setConstant(1.0 / std::sqrt(total));
    mono_.assign(max_degree + 1, {});
    mono_[0] = {cplx(1.0 / std::sqrt(total), 0.0)};
    hess_.assign(max_degree, {});
    sub_.assign(max_degree, 0.0);

    Eigen::VectorXcd x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = measure_.nodes[i];

    for (int n = 0; n < max_degree; ++n) {
        Eigen::VectorXcd v = x.cwiseProduct(q_.col(n));
        const double v0 = weighted_norm(v, w);
        std::vector<cplx> h(n + 1, cplx{});
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k <= n; ++k) {
                const cplx c = weighted_inner(v, q_.col(k), w);
                v -= c * q_.col(k);
                h[k] += c;
            }
        }
        const double s = weighted_norm(v, w);
        if (!(s > 1e-12 * v0)) throw RankError("orthogonalization broke down at degree " + std::to_string(n + 1));
        q_.col(n + 1) = v / s;
        sub_[n] = s;
        for (int k = 0; k <= n; ++k) {
            // Entries at roundoff level are structural zeros (symmetry of the rule).
            if (std::abs(h[k]) > 64.0 * eps * v0) hess_[n].push_back({k, h[k]});
        }
        std::vector<cplx> a(n + 2, cplx{});
        for (int k = 0; k <= n; ++k) a[k + 1] = mono_[n][k];
        for (const auto& e : hess_[n])
            for (int k = 0; k <= e.k; ++k) a[k] -= e.h * mono_[e.k][k];
        for (auto& c : a) c /= s;
        a[n + 1] = {a[n + 1].real(), 0.0};
        mono_[n + 1] = std::move(a);
    }
}

void OrthonormalSystem::evaluate(cplx z, std::span<cplx> out) const {
    out[0] = mono_[0][0];
    for (int n = 0; n < max_degree_ && n + 1 < static_cast<int>(out.size()); ++n) {
        cplx acc = z * out[n];
        for (const auto& e : hess_[n]) acc -= e.h * out[e.k];
        out[n + 1] = acc / sub_[n];
    }
}

std::vector<cplx> OrthonormalSystem::evaluate(cplx z) const {
    std::vector<cplx> out(max_degree_ + 1);
    evaluate(z, out);
    return out;
}

double OrthonormalSystem::gram_defect() const {
    const auto& w = measure_.weights;
    double worst = 0.0;
    for (int j = 0; j <= max_degree_; ++j)
        for (int k = 0; k <= j; ++k) {
            const cplx g = weighted_inner(q_.col(j), q_.col(k), w);
            worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Basis

std::string to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::orthonormal: return "orthonormal";
        case BasisKind::lp_minimal: return "lp_minimal";
        case BasisKind::fekete: return "fekete";
        case BasisKind::faber: return "faber";
    }
    return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "orthonormal") return BasisKind::orthonormal;
    if (s == "lp_minimal" || s == "chebyshev") return BasisKind::lp_minimal;
    if (s == "fekete") return BasisKind::fekete;
    if (s == "faber") return BasisKind::faber;
    throw ValidationError("unknown basis kind '" + s + "'");
}

Basis::Basis(BasisKind kind, double p, std::shared_ptr<const OrthonormalSystem> system, Eigen::MatrixXcd combo,
             std::vector<double> norms)
    : kind_(kind), p_(p), system_(std::move(system)), combo_(std::move(combo)), norms_(std::move(norms)) {
    const int n_max = static_cast<int>(combo_.rows()) - 1;
    const auto& mono = system_->monomials();
    identity_ = combo_.isIdentity(0.0);
    coeffs_.assign(n_max + 1, {});
    for (int n = 0; n <= n_max; ++n) {
        // Fix the phase so the leading coefficient is real and positive.
        const cplx lead = combo_(n, n);
        if (std::abs(lead) == 0.0) throw RankError("basis polynomial of degree " + std::to_string(n) + " is degenerate");
        const cplx phase = std::conj(lead) / std::abs(lead);
        if (phase != cplx(1.0, 0.0)) combo_.row(n) *= phase;
        for (int k = n + 1; k <= n_max; ++k) combo_(n, k) = 0.0;
        std::vector<cplx> a(n + 1, cplx{});
        for (int j = 0; j <= n; ++j) {
            const cplx c = combo_(n, j);
            if (c == cplx{}) continue;
            for (int k = 0; k <= j; ++k) a[k] += c * mono[j][k];
        }
        a[n] = {a[n].real(), 0.0};
        coeffs_[n] = std::move(a);
    }
}

void Basis::evaluate(cplx z, std::span<cplx> out) const {
    const int n_max = degree_max();
    if (identity_) {
        system_->evaluate(z, out.first(n_max + 1));
        return;
    }
    std::vector<cplx> phi(n_max + 1);
    system_->evaluate(z, phi);
    for (int n = 0; n <= n_max; ++n) {
        cplx acc{};
        for (int k = 0; k <= n; ++k) acc += combo_(n, k) * phi[k];
        out[n] = acc;
    }
}

std::vector<cplx> Basis::evaluate(cplx z) const {
    std::vector<cplx> out(degree_max() + 1);
    evaluate(z, out);
    return out;
}

cplx Basis::value(int n, cplx z) const {
    std::vector<cplx> phi(n + 1);
    system_->evaluate(z, phi);
    if (identity_) return phi[n];
    cplx acc{};
    for (int k = 0; k <= n; ++k) acc += combo_(n, k) * phi[k];
    return acc;
}

Eigen::VectorXcd Basis::node_values(int n) const {
    const auto& q = system_->node_values();
    if (identity_) return q.col(n);
    return q.leftCols(n + 1) * combo_.row(n).head(n + 1).transpose();
}

namespace {

nlohmann::json triangular_to_json(const std::vector<std::vector<cplx>>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
        for (const auto& c : r) out.push_back({c.real(), c.imag()});
    return out;
}

}  // namespace

nlohmann::json Basis::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = to_string(kind_);
    j["p"] = std::isinf(p_) ? nlohmann::json("inf") : nlohmann::json(p_);
    j["N"] = degree_max();
    j["support"] = support().to_json();
    j["measure"] = {{"density", to_string(measure().density)}, {"node_count", measure().size()}};
    j["coeffs"] = triangular_to_json(coeffs_);
    std::vector<std::vector<cplx>> combo(degree_max() + 1);
    for (int n = 0; n <= degree_max(); ++n)
        for (int k = 0; k <= n; ++k) combo[n].push_back(combo_(n, k));
    j["combination"] = triangular_to_json(combo);
    j["norms"] = norms_;
    return j;
}

Basis Basis::from_json(const nlohmann::json& j) {
    try {
        const BasisKind kind = basis_kind_from_string(j.at("kind").get<std::string>());
        const double p = j.at("p").is_string() ? infinity_norm : j.at("p").get<double>();
        const int n_max = j.at("N").get<int>();
        const Support support = Support::from_json(j.at("support"));
        const auto& mj = j.at("measure");
        auto measure = reference_measure(support, measure_density_from_string(mj.at("density").get<std::string>()),
                                         mj.at("node_count").get<int>());
        auto system = std::make_shared<const OrthonormalSystem>(std::move(measure), n_max);
        const auto& cj = j.at("combination");
        const auto& aj = j.at("coeffs");
        const std::size_t tri = static_cast<std::size_t>(n_max + 1) * (n_max + 2) / 2;
        if (cj.size() != tri || aj.size() != tri) throw ValidationError("triangular arrays have the wrong length");
        Eigen::MatrixXcd combo = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
        std::size_t idx = 0;
        for (int n = 0; n <= n_max; ++n)
            for (int k = 0; k <= n; ++k, ++idx) combo(n, k) = {cj[idx][0].get<double>(), cj[idx][1].get<double>()};
        Basis b(kind, p, std::move(system), std::move(combo), j.at("norms").get<std::vector<double>>());
        idx = 0;
        for (int n = 0; n <= n_max; ++n) {
            double scale = 0.0;
            for (const auto& c : b.coeffs_[n]) scale = std::max(scale, std::abs(c));
            for (int k = 0; k <= n; ++k, ++idx) {
                const cplx stored{aj[idx][0].get<double>(), aj[idx][1].get<double>()};
                if (std::abs(stored - b.coeffs_[n][k]) > 1e-8 * scale)
                    throw ValidationError("stored coefficient a[" + std::to_string(n) + "][" + std::to_string(k) +
                                          "] disagrees with the rebuilt basis");
            }
            if (!(b.coeffs_[n][n].real() > 0)) throw ValidationError("leading coefficient must be positive");
        }
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed basis JSON: ") + e.what());
    }
}

// Builder with access to the private constructor.
class BasisBuilder {
public:
    static Basis make(BasisKind kind, double p, std::shared_ptr<const OrthonormalSystem> system,
                      Eigen::MatrixXcd combo, std::vector<double> norms,
                      std::vector<std::vector<cplx>> fekete = {}) {
        Basis b(kind, p, std::move(system), std::move(combo), std::move(norms));
        b.fekete_nodes_ = std::move(fekete);
        return b;
    }
};

// Shared helpers for the family constructors (declared in detail header).
namespace detail {

Basis make_basis(BasisKind kind, double p, std::shared_ptr<const OrthonormalSystem> system, Eigen::MatrixXcd combo,
                 std::vector<double> norms, std::vector<std::vector<cplx>> fekete) {
    return BasisBuilder::make(kind, p, std::move(system), std::move(combo), std::move(norms), std::move(fekete));
}

/// Coefficients of a degree-n polynomial (given by node values) in phi_0..phi_n.
Eigen::VectorXcd project(const OrthonormalSystem& sys, const Eigen::VectorXcd& values, int n) {
    const auto& w = sys.measure().weights;
    const auto& q = sys.node_values();
    Eigen::VectorXcd c(n + 1);
    for (int k = 0; k <= n; ++k) c[k] = weighted_inner(values, q.col(k), w);
    return c;
}

}  // namespace detail

double lp_norm(const DiscretizedMeasure& m, const Eigen::VectorXcd& values, double p) {
    if (std::isinf(p)) return values.cwiseAbs().maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) s += m.weights[i] * std::pow(std::abs(values[i]), p);
    return std::pow(s, 1.0 / p);
}

DiscretizedMeasure default_measure(const Support& support, int max_degree) {
    return reference_measure(support, MeasureDensity::equilibrium_density, default_node_count(max_degree));
}

Basis orthonormal_basis(const DiscretizedMeasure& measure, int max_degree) {
    auto sys = std::make_shared<const OrthonormalSystem>(measure, max_degree);
    std::vector<double> norms(max_degree + 1);
    for (int n = 0; n <= max_degree; ++n) norms[n] = lp_norm(measure, sys->node_values().col(n), 2.0);
    return detail::make_basis(BasisKind::orthonormal, 2.0, sys,
                              Eigen::MatrixXcd::Identity(max_degree + 1, max_degree + 1), std::move(norms), {});
}

// ---------------------------------------------------------------------------
// Faber

std::vector<cplx> faber_values(const Support& support, int max_degree, cplx z) {
    const ExteriorLaurent l = support.laurent();
    // psi(w) = c w + b_0 + sum_{k>=1} b_k w^{-k}; only b_1 is nonzero here.
    const std::vector<cplx> b = {l.b1};
    std::vector<cplx> f(max_degree + 1);
    f[0] = 1.0;
    for (int m = 0; m < max_degree; ++m) {
        cplx acc = (z - l.b0) * f[m];
        for (int k = 1; k <= m && k <= static_cast<int>(b.size()); ++k) acc -= b[k - 1] * f[m - k];
        if (m >= 1 && m <= static_cast<int>(b.size())) acc -= static_cast<double>(m) * b[m - 1];
        f[m + 1] = acc / l.scale;
    }
    return f;
}

Basis faber_basis(const Support& support, int max_degree) {
    if (max_degree < 1) throw ValidationError("faber_basis needs N >= 1");
    auto sys = std::make_shared<const OrthonormalSystem>(default_measure(support, max_degree), max_degree);
    const auto& nodes = sys->measure().nodes;
    const auto m = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXcd vals(m, max_degree + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto f = faber_values(support, max_degree, nodes[i]);
        for (int n = 0; n <= max_degree; ++n) vals(i, n) = f[n];
    }
    Eigen::MatrixXcd combo = Eigen::MatrixXcd::Zero(max_degree + 1, max_degree + 1);
    std::vector<double> norms(max_degree + 1, 1.0);
    for (int n = 0; n <= max_degree; ++n) {
        const double sup = boundary_sup(support, [&](cplx z) { return faber_values(support, n, z)[n]; });
        combo.row(n).head(n + 1) = detail::project(*sys, vals.col(n) / sup, n).transpose();
    }
    return detail::make_basis(BasisKind::faber, infinity_norm, sys, std::move(combo), std::move(norms), {});
}

// ---------------------------------------------------------------------------
// Minimality diagnostics

std::vector<double> basis_norms(const Basis& basis, const DiscretizedMeasure& measure, double p) {
    const int n_max = basis.degree_max();
    std::vector<double> norms(n_max + 1, 0.0);
    if (std::isinf(p)) {
        for (int n = 0; n <= n_max; ++n)
            norms[n] = boundary_sup(basis.support(), [&](cplx z) { return basis.value(n, z); });
        return norms;
    }
    std::vector<cplx> vals(n_max + 1);
    for (std::size_t i = 0; i < measure.size(); ++i) {
        basis.evaluate(measure.nodes[i], vals);
        for (int n = 0; n <= n_max; ++n) norms[n] += measure.weights[i] * std::pow(std::abs(vals[n]), p);
    }
    for (auto& v : norms) v = std::pow(v, 1.0 / p);
    return norms;
}

double near_lead_slope(const Basis& basis, double norm, int n, int i) {
    const double c = std::abs(basis.coeff(n, n - i));
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return std::log(norm / c) / n - std::log(basis.support().capacity());
}

MinimalityReport minimality_report(const Basis& basis, const DiscretizedMeasure& measure, double p,
                                   std::optional<int> window_override) {
    const int n_max = basis.degree_max();
    if (n_max < 8) throw ValidationError("minimality_report needs basis degree >= 8");
    const auto norms = basis_norms(basis, measure, p);
    const double log_cap = std::log(basis.support().capacity());
    MinimalityReport r;
    r.p = p;
    for (int n = 1; n <= n_max; ++n) {
        const int w = std::min(n, window_override.value_or(default_window(n)));
        r.n.push_back(n);
        r.window.push_back(w);
        r.lead_slope.push_back(std::log(basis.coeff(n, n).real()) / n + log_cap);
        r.norm_slope.push_back(std::log(norms[n]) / n);
        r.near_lead_slope.push_back(near_lead_slope(basis, norms[n], n, w));
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= w; ++i) lo = std::min(lo, near_lead_slope(basis, norms[n], n, i));
        r.near_lead_slope_min.push_back(lo);
    }
    return r;
}

}  // namespace rpz
