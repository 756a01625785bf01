#include "rpz/support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "rpz/error.hpp"

namespace rpz {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_angle(double t) {
    double r = std::fmod(t, 2.0 * pi);
    if (r < 0) r += 2.0 * pi;
    if (r >= 2.0 * pi) r = 0.0;
    return r;
}

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = z;
                p0 = 1.0;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

}  // namespace

std::string to_string(SupportKind kind) {
    switch (kind) {
        case SupportKind::circle: return "circle";
        case SupportKind::interval: return "interval";
        case SupportKind::ellipse: return "ellipse";
    }
    return "?";
}

Support Support::circle(double radius) {
    if (!(radius > 0) || !std::isfinite(radius)) throw ValidationError("circle radius must be positive");
    return {SupportKind::circle, radius, 0.0, radius};
}

Support Support::interval(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ValidationError("interval requires a < b");
    return {SupportKind::interval, a, b, (b - a) / 4.0};
}

Support Support::ellipse(double alpha, double beta) {
    if (!(beta > 0) || !(alpha >= beta) || !std::isfinite(alpha))
        throw ValidationError("ellipse requires alpha >= beta > 0");
    return {SupportKind::ellipse, alpha, beta, (alpha + beta) / 2.0};
}

ExteriorLaurent Support::laurent() const {
    switch (kind_) {
        case SupportKind::circle: return {p0_, 0.0, 0.0};
        case SupportKind::interval: {
            const double h = (p1_ - p0_) / 2.0;
            return {h / 2.0, 0.5 * (p0_ + p1_), h / 2.0};
        }
        case SupportKind::ellipse: {
            const double k = (p0_ - p1_) / (p0_ + p1_);
            return {capacity_, 0.0, capacity_ * k};
        }
    }
    return {};
}

cplx Support::exterior_map(cplx z) const {
    switch (kind_) {
        case SupportKind::circle: return z / p0_;
        case SupportKind::interval: {
            const double m = 0.5 * (p0_ + p1_), h = 0.5 * (p1_ - p0_);
            const cplx t = (z - m) / h;
            return t + std::sqrt(t - 1.0) * std::sqrt(t + 1.0);
        }
        case SupportKind::ellipse: {
            const double f = std::sqrt(p0_ * p0_ - p1_ * p1_);
            if (f == 0.0) return z / capacity_;
            return (z + std::sqrt(z - f) * std::sqrt(z + f)) / (2.0 * capacity_);
        }
    }
    return z;
}

cplx Support::inverse_map(cplx w) const {
    const ExteriorLaurent l = laurent();
    return l.scale * w + l.b0 + l.b1 / w;
}

double Support::green(cplx z) const {
    if (kind_ == SupportKind::circle) return std::max(0.0, std::log(std::abs(z) / p0_));
    if (kind_ == SupportKind::ellipse) {
        const double x = z.real() / p0_, y = z.imag() / p1_;
        if (x * x + y * y <= 1.0) return 0.0;
    }
    return std::max(0.0, std::log(std::abs(exterior_map(z))));
}

cplx Support::boundary_point(double t) const {
    switch (kind_) {
        case SupportKind::circle: return std::polar(p0_, t);
        case SupportKind::interval: return {t, 0.0};
        case SupportKind::ellipse: return {p0_ * std::cos(t), p1_ * std::sin(t)};
    }
    return {};
}

cplx Support::boundary_tangent(double t) const {
    switch (kind_) {
        case SupportKind::circle: return std::polar(p0_, t) * cplx(0.0, 1.0);
        case SupportKind::interval: return {1.0, 0.0};
        case SupportKind::ellipse: return {-p0_ * std::sin(t), p1_ * std::cos(t)};
    }
    return {};
}

cplx Support::boundary_curvature(double t) const {
    if (kind_ == SupportKind::interval) return {0.0, 0.0};
    return -boundary_point(t);
}

double Support::param_lo() const { return kind_ == SupportKind::interval ? p0_ : 0.0; }
double Support::param_hi() const { return kind_ == SupportKind::interval ? p1_ : 2.0 * pi; }

double Support::distance_to_hull(cplx z) const {
    switch (kind_) {
        case SupportKind::circle: return std::max(0.0, std::abs(z) - p0_);
        case SupportKind::interval: {
            const double x = std::clamp(z.real(), p0_, p1_);
            return std::abs(z - cplx(x, 0.0));
        }
        case SupportKind::ellipse: {
            const double x = z.real() / p0_, y = z.imag() / p1_;
            if (x * x + y * y <= 1.0) return 0.0;
            // Coarse scan then golden refinement of the closest boundary angle.
            double best_t = 0.0, best = 1e300;
            constexpr int scan = 720;
            for (int j = 0; j < scan; ++j) {
                const double t = 2.0 * pi * j / scan;
                const double d = std::abs(z - boundary_point(t));
                if (d < best) best = d, best_t = t;
            }
            double a = best_t - 2.0 * pi / scan, b = best_t + 2.0 * pi / scan;
            for (int it = 0; it < 80; ++it) {
                const double c = a + (b - a) / 3.0, d = b - (b - a) / 3.0;
                if (std::abs(z - boundary_point(c)) < std::abs(z - boundary_point(d))) b = d;
                else a = c;
            }
            return std::min(best, std::abs(z - boundary_point(0.5 * (a + b))));
        }
    }
    return 0.0;
}

cplx Support::center() const {
    if (kind_ == SupportKind::interval) return {0.5 * (p0_ + p1_), 0.0};
    return {0.0, 0.0};
}

nlohmann::json Support::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    switch (kind_) {
        case SupportKind::circle: j["params"] = {{"radius", p0_}}; break;
        case SupportKind::interval: j["params"] = {{"a", p0_}, {"b", p1_}}; break;
        case SupportKind::ellipse: j["params"] = {{"alpha", p0_}, {"beta", p1_}}; break;
    }
    return j;
}

Support Support::from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const auto& p = j.at("params");
        if (kind == "circle") return circle(p.value("radius", 1.0));
        if (kind == "interval") return interval(p.at("a").get<double>(), p.at("b").get<double>());
        if (kind == "ellipse") return ellipse(p.at("alpha").get<double>(), p.at("beta").get<double>());
        throw ValidationError("unknown support kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed support descriptor: ") + e.what());
    }
}

std::string to_string(MeasureDensity d) {
    return d == MeasureDensity::equilibrium_density ? "equilibrium_density" : "uniform_arclength";
}

MeasureDensity measure_density_from_string(const std::string& s) {
    if (s == "equilibrium_density" || s == "equilibrium") return MeasureDensity::equilibrium_density;
    if (s == "uniform_arclength" || s == "uniform") return MeasureDensity::uniform_arclength;
    throw ValidationError("unknown measure density '" + s + "'");
}

void DiscretizedMeasure::write_csv(std::ostream& os) const {
    os << "node_re,node_im,weight\n";
    os.precision(17);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        os << nodes[i].real() << ',' << nodes[i].imag() << ',' << weights[i] << '\n';
}

DiscretizedMeasure reference_measure(const Support& support, MeasureDensity density, int node_count) {
    if (node_count < 4) throw ValidationError("reference_measure needs at least 4 nodes");
    DiscretizedMeasure m{support, density, {}, {}, 0};
    m.nodes.resize(node_count);
    m.weights.assign(node_count, 1.0 / node_count);
    switch (support.kind()) {
        case SupportKind::circle:
            // Uniform arclength and equilibrium measure coincide on a circle.
            for (int j = 0; j < node_count; ++j) m.nodes[j] = std::polar(support.radius(), 2.0 * pi * j / node_count);
            m.exactness_degree = node_count - 1;
            break;
        case SupportKind::ellipse:
            if (density != MeasureDensity::equilibrium_density)
                throw CapabilityError("ellipse supports only the equilibrium density");
            for (int j = 0; j < node_count; ++j)
                m.nodes[j] = support.inverse_map(std::polar(1.0, 2.0 * pi * j / node_count));
            m.exactness_degree = node_count - 1;
            break;
        case SupportKind::interval: {
            const double mid = 0.5 * (support.a() + support.b()), h = 0.5 * (support.b() - support.a());
            if (density == MeasureDensity::equilibrium_density) {
                for (int j = 0; j < node_count; ++j)
                    m.nodes[j] = mid + h * std::cos((2.0 * (node_count - j) - 1.0) * pi / (2.0 * node_count));
            } else {
                std::vector<double> x, w;
                gauss_legendre(node_count, x, w);
                for (int j = 0; j < node_count; ++j) {
                    m.nodes[j] = mid + h * x[j];
                    m.weights[j] = 0.5 * w[j];
                }
            }
            m.exactness_degree = 2 * node_count - 1;
            break;
        }
    }
    return m;
}

double EquilibriumOracle::potential(cplx z) const {
    return -std::log(support_.capacity()) - support_.green(z);
}

double EquilibriumOracle::project(cplx z) const {
    if (support_.kind() == SupportKind::interval) return z.real();
    return wrap_angle(std::arg(support_.exterior_map(z)));
}

double EquilibriumOracle::boundary_cdf(double s) const {
    if (support_.kind() == SupportKind::interval) {
        const double a = support_.a(), b = support_.b();
        if (s <= a) return 0.0;
        if (s >= b) return 1.0;
        return (2.0 / pi) * std::asin(std::sqrt((s - a) / (b - a)));
    }
    return std::clamp(s / (2.0 * pi), 0.0, 1.0);
}

std::vector<cplx> EquilibriumOracle::discretization(int n) const {
    std::vector<cplx> pts(n);
    if (support_.kind() == SupportKind::interval) {
        const double mid = 0.5 * (support_.a() + support_.b()), h = 0.5 * (support_.b() - support_.a());
        for (int j = 0; j < n; ++j) pts[j] = mid - h * std::cos((j + 0.5) * pi / n);
    } else {
        for (int j = 0; j < n; ++j) pts[j] = support_.inverse_map(std::polar(1.0, 2.0 * pi * j / n));
    }
    return pts;
}

std::vector<cplx> boundary_grid(const Support& support, int count) {
    std::vector<cplx> g(count);
    if (support.kind() == SupportKind::interval) {
        const double mid = 0.5 * (support.a() + support.b()), h = 0.5 * (support.b() - support.a());
        for (int j = 0; j < count; ++j) g[j] = mid - h * std::cos(pi * j / (count - 1));
    } else {
        for (int j = 0; j < count; ++j) g[j] = support.inverse_map(std::polar(1.0, 2.0 * pi * j / count));
    }
    return g;
}

std::vector<cplx> exterior_grid(const Support& support, const GridSpec& spec) {
    std::vector<cplx> grid;
    grid.reserve(static_cast<std::size_t>(spec.rings) * spec.points_per_ring);
    auto ring_distance = [&](double R) {
        double d = 1e300;
        for (int j = 0; j < spec.points_per_ring; ++j) {
            const cplx z = support.inverse_map(std::polar(R, 2.0 * pi * (j + 0.5) / spec.points_per_ring));
            d = std::min(d, support.distance_to_hull(z));
        }
        return d;
    };
    for (int ring = 1; ring <= spec.rings; ++ring) {
        const double target = spec.margin * ring;
        double lo = 1.0, hi = 2.0;
        while (ring_distance(hi) < target) hi *= 2.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ring_distance(mid) < target ? lo : hi) = mid;
        }
        for (int j = 0; j < spec.points_per_ring; ++j)
            grid.push_back(support.inverse_map(std::polar(hi, 2.0 * pi * (j + 0.5) / spec.points_per_ring)));
    }
    return grid;
}

std::vector<cplx> interior_grid(const Support& support, double fraction, int radial, int angular) {
    std::vector<cplx> grid;
    if (!support.interior_flag()) return grid;
    for (int i = 0; i < radial; ++i) {
        const double s = fraction * (i + 1.0) / radial;
        for (int j = 0; j < angular; ++j) {
            const double t = 2.0 * pi * (j + 0.5 * (i % 2)) / angular;
            grid.push_back(s * support.boundary_point(t) + (1.0 - s) * support.center());
        }
    }
    grid.push_back(support.center());
    return grid;
}

}  // namespace rpz
