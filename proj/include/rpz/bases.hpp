#pragma once

// Asymptotically minimal polynomial families on the built-in supports.
//
// Every family is stored as a lower-triangular combination of the
// orthonormal system of a reference measure, p_n = sum_k C[n][k] phi_k. The
// phi_k come from Arnoldi orthogonalization of node-value vectors and are
// evaluated through their Hessenberg recurrence, which stays accurate where
// monomial evaluation loses all digits. Monomial coefficients a[n][k] are
// recovered alongside for the coefficient statistics.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rpz/error.hpp"
#include "rpz/support.hpp"

namespace rpz {

/// Orthonormal polynomials of a discretized measure (Arnoldi on node values).
class OrthonormalSystem {
public:
    OrthonormalSystem(DiscretizedMeasure measure, int max_degree);

    const DiscretizedMeasure& measure() const { return measure_; }
    int max_degree() const { return max_degree_; }

    /// phi_0..phi_N at z.
    void evaluate(cplx z, std::span<cplx> out) const;
    std::vector<cplx> evaluate(cplx z) const;

    /// Node values: column k holds phi_k at the measure nodes.
    const Eigen::MatrixXcd& node_values() const { return q_; }

    /// Monomial coefficients of phi_n (index k = coefficient of z^k).
    const std::vector<std::vector<cplx>>& monomials() const { return mono_; }

    /// Largest |<phi_j, phi_k>| - delta_jk under the quadrature rule.
    double gram_defect() const;

private:
    struct Entry {
        int k;
        cplx h;
    };
    DiscretizedMeasure measure_;
    int max_degree_;
    Eigen::MatrixXcd q_;
    // Column n of the Hessenberg matrix: z phi_n = sum_k h[k] phi_k + sub[n] phi_{n+1}.
    std::vector<std::vector<Entry>> hess_;
    std::vector<double> sub_;
    std::vector<std::vector<cplx>> mono_;
};

enum class BasisKind { orthonormal, lp_minimal, fekete, faber };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& s);

class Basis {
public:
    BasisKind kind() const { return kind_; }
    /// Exponent of the family's defining norm (2 for orthonormal, infinity for fekete/faber).
    double norm_exponent() const { return p_; }
    int degree_max() const { return static_cast<int>(coeffs_.size()) - 1; }
    const Support& support() const { return system_->measure().support; }
    const DiscretizedMeasure& measure() const { return system_->measure(); }
    const OrthonormalSystem& system() const { return *system_; }

    /// a[n][k], 0 <= k <= n.
    const std::vector<std::vector<cplx>>& coeffs() const { return coeffs_; }
    cplx coeff(int n, int k) const { return coeffs_[n][k]; }
    /// ||p_n|| under the family's defining norm.
    const std::vector<double>& norms() const { return norms_; }
    /// C[n][k] with p_n = sum_k C[n][k] phi_k.
    const Eigen::MatrixXcd& combination() const { return combo_; }

    /// p_0..p_N at z.
    void evaluate(cplx z, std::span<cplx> out) const;
    std::vector<cplx> evaluate(cplx z) const;
    cplx value(int n, cplx z) const;

    /// Values of p_n at the nodes of the reference measure.
    Eigen::VectorXcd node_values(int n) const;

    /// Fekete nodes used for p_n (fekete kind only).
    const std::vector<std::vector<cplx>>& fekete_nodes() const { return fekete_nodes_; }

    /// JSON export: {kind, p, N, coeffs, support, measure, combination}.
    nlohmann::json to_json() const;
    /// Rebuilds the basis and validates the stored coefficients against it.
    static Basis from_json(const nlohmann::json& j);

private:
    friend class BasisBuilder;
    Basis(BasisKind kind, double p, std::shared_ptr<const OrthonormalSystem> system, Eigen::MatrixXcd combo,
          std::vector<double> norms);

    BasisKind kind_;
    double p_;
    std::shared_ptr<const OrthonormalSystem> system_;
    Eigen::MatrixXcd combo_;
    bool identity_ = false;
    std::vector<std::vector<cplx>> coeffs_;
    std::vector<double> norms_;
    std::vector<std::vector<cplx>> fekete_nodes_;
};

/// Raised when an iterative minimizer stops at its iteration cap.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, std::vector<cplx> best, double residual)
        : Error(what), best_iterate(std::move(best)), residual(residual) {}
    std::vector<cplx> best_iterate;  // monomial coefficients of the best monic iterate
    double residual;                 // relative objective change at the last iteration
};

constexpr double infinity_norm = std::numeric_limits<double>::infinity();

/// L^p(tau) norm of node values; p = infinity gives the max over nodes.
double lp_norm(const DiscretizedMeasure& m, const Eigen::VectorXcd& values, double p);

Basis orthonormal_basis(const DiscretizedMeasure& measure, int max_degree);

struct LpOptions {
    double relative_tolerance = 1e-10;
    int max_iterations = 500;
};

/// Monic L^p(tau) minimizers rescaled to unit norm. p in [1, inf]; p = inf
/// only on circle and interval supports (Remez exchange on the interval).
Basis lp_minimal_basis(const DiscretizedMeasure& measure, double p, int max_degree, const LpOptions& opts = {});

struct FeketeOptions {
    int restarts = 8;
    std::uint64_t seed = 0x5eed;
    double energy_tolerance = 1e-12;
    int max_sweeps = 20000;
};

struct FeketeResult {
    std::vector<cplx> points;
    std::vector<double> params;
    /// sum_{i<j} log|z_i - z_j|
    double log_vandermonde = 0.0;
    int sweeps = 0;
};

/// Local maximizer of the Vandermonde energy by projected coordinate ascent
/// over the boundary parameter, best of several seeded restarts.
FeketeResult fekete_points(const Support& support, int n, const FeketeOptions& opts = {});

/// gamma_n prod (z - z_{n,j}), sup-norm one on the support.
Basis fekete_basis(const Support& support, int max_degree, const FeketeOptions& opts = {});

/// Faber polynomials from the exterior-map Laurent data, sup-norm one.
Basis faber_basis(const Support& support, int max_degree);

/// Raw Faber polynomials F_0..F_N at z (F_n = Phi^n + O(1/z)).
std::vector<cplx> faber_values(const Support& support, int max_degree, cplx z);

/// Monic Chebyshev polynomial of the interval via Remez exchange, in the
/// Chebyshev basis of [-1, 1]: returns coefficients d_0..d_n (d_n = 1) of
/// T_n + sum d_k T_k and the levelled error |E|.
struct RemezResult {
    std::vector<double> cheb;
    double level = 0.0;
    int iterations = 0;
};
RemezResult remez_monic(int n, int max_iterations = 60);

/// Default reference measure for families that do not prescribe one.
DiscretizedMeasure default_measure(const Support& support, int max_degree);

// Minimality diagnostics.

struct MinimalityReport {
    double p = 2.0;
    std::vector<int> n;
    std::vector<int> window;
    std::vector<double> lead_slope;
    std::vector<double> norm_slope;
    std::vector<double> near_lead_slope;
    /// min over all windows 0..window(n) of the near-leading slope.
    std::vector<double> near_lead_slope_min;
};

inline int default_window(int n) {
    const double l = std::log(static_cast<double>(n));
    return static_cast<int>(std::floor(l * l));
}

/// Norm of p_n in L^p(measure), or the sup over the support when p = inf.
std::vector<double> basis_norms(const Basis& basis, const DiscretizedMeasure& measure, double p);

/// (1/n) log(norm / |a[n][n-i]|) - log cap, +inf when the coefficient vanishes.
double near_lead_slope(const Basis& basis, double norm, int n, int i);

MinimalityReport minimality_report(const Basis& basis, const DiscretizedMeasure& measure, double p,
                                   std::optional<int> window_override = std::nullopt);

}  // namespace rpz
