#pragma once

// Potentials, energies and the distances between a zero measure and the
// equilibrium measure, plus numerical checkers for the area, annulus and
// deterministic-criterion lemmas.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpz/bases.hpp"
#include "rpz/ensembles.hpp"
#include "rpz/roots.hpp"
#include "rpz/support.hpp"

namespace rpz {

/// -(1/D) sum log|z - z_i|; +inf when z is one of the points.
double log_potential(const EmpiricalMeasure& m, cplx z);
double log_potential(const EquilibriumOracle& oracle, cplx z);

struct EnergyResult {
    double value = 0.0;
    bool singular = false;  // coincident points; value is +inf
};

/// -(2 / (D(D-1))) sum_{i<j} log|z_i - z_j|.
EnergyResult energy(const EmpiricalMeasure& m);

/// max over grid of |p_emp - p_oracle|. The grid overload trusts its input;
/// the GridSpec overload builds the exterior level-curve grid.
double potential_discrepancy(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, std::span<const cplx> grid);
double potential_discrepancy(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, const GridSpec& spec = {});

enum class Projection { angle, real_part };

std::string to_string(Projection p);

struct KsResult {
    double ks = 0.0;
    double im_mean = 0.0;  // mean |Im z| (reported for every projection)
};

KsResult boundary_ks(const EmpiricalMeasure& m, const EquilibriumOracle& oracle, Projection projection);
/// angle for circle and ellipse, real_part for the interval.
Projection default_projection(const Support& support);

/// Fraction of points with |z| > r.
double mass_outside(const EmpiricalMeasure& m, double r);

/// Fraction of points at least `margin` inside the boundary of P(K)
/// (inside the shrunken disk or ellipse); zero for the interval.
double interior_mass(const EmpiricalMeasure& m, const Support& support, double margin);

struct CartanResult {
    double area = 0.0;
    double standard_error = 0.0;
    double bound = 0.0;  // 25 pi e^2 h^2
    double radius = 0.0;  // sampling disk
    bool pass = false;   // area - 3 SE <= bound
};

/// Sublevel set {|p| <= h^n} of the monic polynomial, by Monte Carlo in the
/// disk of radius max|root| + h.
CartanResult cartan_check(std::span<const cplx> zeta, double h, std::uint64_t samples, std::uint64_t seed);
CartanResult cartan_check_roots(std::span<const cplx> roots, double h, std::uint64_t samples, std::uint64_t seed);

struct AnnulusResult {
    double best_radius = 0.0;
    double log_floor = 0.0;      // log min_theta |p(best_radius e^{i theta})|
    double log_threshold = 0.0;  // n log((r2 - r1) / 5)
    bool pass = false;
};

/// Best circle in r1 < |z| < r2 for the monic polynomial; radii
/// r1 + (r2 - r1) k / (radial + 1), k = 1..radial.
AnnulusResult annulus_floor(std::span<const cplx> zeta, double r1, double r2, int radial, int angular);
AnnulusResult annulus_floor_roots(std::span<const cplx> roots, double r1, double r2, int radial, int angular);

struct DetCriterionRow {
    int n = 0;
    int i_n = 0;
    double c1 = 0.0;
    double c2 = 0.0;         // NaN when the interior is empty
    bool c1_undefined = false;  // zero near-leading coefficient; c1 = -inf
};

struct DetCriterionReport {
    std::vector<DetCriterionRow> rows;
    bool vacuous_interior = false;
};

/// Rows for n = 1..N of the basis itself; i_n defaults to 0 and is clamped to n.
DetCriterionReport det_criterion_report(const Basis& basis, const DiscretizedMeasure& measure, double p,
                                        std::optional<int> i_n, std::span<const cplx> interior);

/// One row for a random polynomial, with i_n = I_n from near_leading_index.
DetCriterionRow det_criterion_row(const Basis& basis, const RandomPolynomial& g, const DiscretizedMeasure& measure,
                                  double p, std::span<const cplx> interior);

}  // namespace rpz
