#pragma once

// Compact planar supports with closed-form equilibrium data, reference
// quadrature measures on them, and the equilibrium oracle.

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace rpz {

using cplx = std::complex<double>;

enum class SupportKind { circle, interval, ellipse };

std::string to_string(SupportKind kind);

/// Laurent data of the inverse exterior map psi(w) = scale*w + b0 + b1/w.
/// All built-in supports have this three-term form.
struct ExteriorLaurent {
    double scale = 1.0;
    cplx b0{0.0, 0.0};
    cplx b1{0.0, 0.0};
};

class Support {
public:
    static Support circle(double radius);
    static Support interval(double a, double b);
    static Support ellipse(double alpha, double beta);

    SupportKind kind() const { return kind_; }
    double capacity() const { return capacity_; }
    /// True iff the polynomially convex hull has nonempty interior.
    bool interior_flag() const { return kind_ != SupportKind::interval; }

    double radius() const { return p0_; }
    double a() const { return p0_; }
    double b() const { return p1_; }
    double alpha() const { return p0_; }
    double beta() const { return p1_; }

    ExteriorLaurent laurent() const;

    /// Exterior conformal map onto |w| > 1, normalized as z/capacity at infinity.
    /// Continued analytically inside the ellipse; the interval and circle maps
    /// have |phi| >= 1 or the natural continuation.
    cplx exterior_map(cplx z) const;
    cplx inverse_map(cplx w) const;

    /// Green function of the unbounded complement with pole at infinity; 0 on P(K).
    double green(cplx z) const;

    /// Boundary parameterization: angle in [0, 2pi) for circle/ellipse,
    /// real coordinate in [a, b] for the interval.
    cplx boundary_point(double t) const;
    /// First and second derivatives of boundary_point with respect to t.
    cplx boundary_tangent(double t) const;
    cplx boundary_curvature(double t) const;
    double param_lo() const;
    double param_hi() const;
    bool periodic() const { return kind_ != SupportKind::interval; }

    /// Distance from z to the polynomially convex hull (0 inside).
    double distance_to_hull(cplx z) const;

    /// Geometric center, used as the single Fekete point of order one.
    cplx center() const;

    nlohmann::json to_json() const;
    static Support from_json(const nlohmann::json& j);

    friend bool operator==(const Support&, const Support&) = default;

private:
    Support(SupportKind kind, double p0, double p1, double capacity)
        : kind_(kind), p0_(p0), p1_(p1), capacity_(capacity) {}

    SupportKind kind_;
    double p0_;
    double p1_;
    double capacity_;
};

/// build_support: validated construction from a {kind, params} descriptor.
inline Support build_support(const nlohmann::json& descriptor) { return Support::from_json(descriptor); }

enum class MeasureDensity { equilibrium_density, uniform_arclength };

std::string to_string(MeasureDensity d);
MeasureDensity measure_density_from_string(const std::string& s);

struct DiscretizedMeasure {
    Support support;
    MeasureDensity density;
    std::vector<cplx> nodes;
    std::vector<double> weights;
    /// The rule integrates q * conj(r) exactly when deg q + deg r <= exactness_degree.
    int exactness_degree = 0;

    std::size_t size() const { return nodes.size(); }

    /// Integral of f against the measure.
    template <class F>
    auto integrate(F&& f) const {
        decltype(f(nodes[0])) acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }

    void write_csv(std::ostream& os) const;
};

/// Circle: trapezoid rule on equispaced angles. Interval: Gauss-Chebyshev
/// (arcsine density) or normalized Gauss-Legendre (uniform). Ellipse:
/// trapezoid in the exterior-map angle, i.e. the equilibrium measure.
DiscretizedMeasure reference_measure(const Support& support, MeasureDensity density, int node_count);

/// Default node count for bases up to degree N: 4 (N + 1).
inline int default_node_count(int max_degree) { return 4 * (max_degree + 1); }

class EquilibriumOracle {
public:
    explicit EquilibriumOracle(Support support) : support_(std::move(support)) {}

    const Support& support() const { return support_; }

    /// p(z) = -integral log|z - x| dmu_K(x) = -log cap - g(z).
    double potential(cplx z) const;

    /// Projection used for boundary KS: exterior-map angle in [0, 2pi)
    /// (circle, ellipse) or real part (interval).
    double project(cplx z) const;

    /// Distribution function of mu_K in the projected coordinate.
    double boundary_cdf(double s) const;

    /// n-point discretization placed at the quantiles (j + 1/2)/n for the
    /// interval and at angles 2 pi j / n otherwise.
    std::vector<cplx> discretization(int n) const;

private:
    Support support_;
};

inline EquilibriumOracle equilibrium_oracle(const Support& support) { return EquilibriumOracle(support); }

// Grids.

/// count points on the boundary: equispaced exterior-map angles, or
/// Chebyshev-Lobatto points (endpoints included) on the interval.
std::vector<cplx> boundary_grid(const Support& support, int count);

struct GridSpec {
    double margin = 0.2;
    int rings = 2;
    int points_per_ring = 128;
};

/// Level curves of the Green function at hull distances margin, 2 margin, ...
std::vector<cplx> exterior_grid(const Support& support, const GridSpec& spec = {});

/// Points of Int P(K) scaled toward the center by at most `fraction`.
/// Empty for supports without interior.
std::vector<cplx> interior_grid(const Support& support, double fraction, int radial, int angular);

/// Supremum of |f| on the support boundary: grid maximum refined locally by
/// golden-section search around the best grid points.
template <class F>
double boundary_sup(const Support& support, F&& f, int grid_count = 2048);

}  // namespace rpz

#include "rpz/detail/boundary_sup.hpp"
