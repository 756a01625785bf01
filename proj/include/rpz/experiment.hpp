#pragma once

// Configured, seeded experiment runs and their on-disk outputs.
//
// Every CSV starts with a comment line carrying the schema version and the
// hash of the resolved configuration; merge_csv refuses inputs whose hashes
// differ. Trial t draws its coefficients from derive_seed(master_seed, t,
// "coefficients") for every n, so a trial follows one coefficient sequence
// along the degree schedule and results do not depend on the worker count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpz/bases.hpp"
#include "rpz/ensembles.hpp"
#include "rpz/metrics.hpp"
#include "rpz/support.hpp"

namespace rpz {

inline constexpr int schema_version = 1;

enum ExitCode : int { exit_ok = 0, exit_thresholds = 2, exit_infrastructure = 3 };

struct Thresholds {
    double ks = 0.08;
    double discrepancy = 0.1;
    double mass_outside = 0.02;   // median mass_outside(radii[0])
    bool ks_monotone = true;      // median KS nonincreasing along the schedule
    double escape_frequency = 0.02;
    double failed_fraction = 0.1;
    double lead_slope = 0.1;
    double norm_slope = 0.1;
};

struct NecessitySettings {
    double radius = 5.0;
    double c_margin = 0.02;
    int calibration_radii = 8;
    int calibration_angles = 512;
    std::optional<double> c_override;
    /// Allow distributions that satisfy both tail conditions (control runs).
    bool control = false;
};

struct CheckSettings {
    std::vector<int> cartan_degrees{5, 20, 50};
    int cartan_instances = 100;
    std::uint64_t cartan_samples = 100000;
    std::vector<double> cartan_h{0.05, 0.3, 1.0};
    int annulus_instances = 100;
    int annulus_degree = 15;
    double annulus_root_radius = 3.0;
    double annulus_r1 = 4.0, annulus_r2 = 5.0;
    int annulus_radial = 16, annulus_angular = 256;
    int minimality_degree = 48;
    int det_trials = 50;
    int det_degree = 128;
};

struct ExperimentConfig {
    nlohmann::json support{{"kind", "circle"}, {"params", {{"radius", 1.0}}}};
    MeasureDensity density = MeasureDensity::uniform_arclength;
    std::optional<int> node_count;
    BasisKind basis_kind = BasisKind::orthonormal;
    double basis_p = 2.0;
    int N = 256;
    nlohmann::json distribution{{"name", "gaussian"}};
    std::vector<int> degrees{32, 64, 128, 256};
    int trials = 50;
    std::uint64_t master_seed = 20240601;
    Thresholds thresholds;
    std::vector<double> radii{3.0, 5.0};
    GridSpec grid;
    NecessitySettings necessity;
    CheckSettings checks;
    std::filesystem::path output_dir = "out";

    /// Validates and fills defaults; errors raise ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
    /// Hash of the resolved configuration (output_dir excluded), 16 hex digits.
    std::string hash() const;
};

Support config_support(const ExperimentConfig& c);
DiscretizedMeasure config_measure(const ExperimentConfig& c);
Basis config_basis(const ExperimentConfig& c);

struct ConvergenceRow {
    int n = 0;
    int trial = 0;
    double discrepancy = 0.0;
    double ks = 0.0;
    double mass_r1 = 0.0;
    double mass_r2 = 0.0;
    double im_mean = 0.0;
    double energy = 0.0;
    double interior_mass_defect = 0.0;
};

struct Quantiles {
    double median = 0.0, q25 = 0.0, q75 = 0.0;
};

Quantiles quantiles(std::vector<double> v);

struct ConvergenceSummaryRow {
    int n = 0;
    int completed = 0;
    Quantiles ks, discrepancy, mass_r1, mass_r2, im_mean, energy;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<ConvergenceSummaryRow> summary;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
    std::vector<std::string> violations;
    bool thresholds_met = false;
};

ConvergenceReport run_convergence(const ExperimentConfig& c, bool write = true);

struct NecessityRow {
    int n = 0;
    double c = 0.0;
    double freq_A = 0.0;
    double freq_B = 0.0;
    int b_count = 0;         // trials with B_{n,c} on the solved coefficients
    int escape_count = 0;    // trials with mass_outside(r) >= 1/2
    double escape_frequency = 0.0;
    int counterexamples = 0;  // B without escape
    double b_r = 0.0;
    int completed = 0;
    int failed = 0;
};

struct NecessityReport {
    std::vector<NecessityRow> rows;
    std::vector<std::string> warnings;
    std::vector<std::string> violations;
    bool thresholds_met = false;
};

struct Calibration {
    double c = 0.0;
    std::vector<double> c_j;       // per j in [ceil(n/4), floor(n/2)]
    std::vector<double> radius_j;  // chosen circle per j
    double b_r = 0.0;              // max_i max_{|z|=r} |p_i|^{1/i}
};

/// Smallest c (plus margin) with e^{cn}|p_j| > sum_{i != j, i <= n} |p_i| on a
/// circle of radius in (r, r + 1) for every j in [n/4, n/2].
Calibration calibrate_c(const Basis& basis, int n, const NecessitySettings& s);

NecessityReport run_necessity(const ExperimentConfig& c, bool write = true);

struct CheckRow {
    std::string check;
    std::string instance;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ChecksReport {
    std::vector<CheckRow> rows;
    bool all_pass = false;
};

ChecksReport run_checks(const ExperimentConfig& c, bool write = true);

enum class PlotKind { zero_scatter, potential_heatmap, metric_vs_n };

PlotKind plot_kind_from_string(const std::string& s);
std::string to_string(PlotKind k);

/// Reads results.json from the output directory and writes plots/*.csv.
/// Returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& output_dir, PlotKind kind);

/// First-line header of every CSV written here.
std::string csv_preamble(const std::string& hash);
/// Hash recorded in a CSV preamble; ConfigError if missing.
std::string read_csv_hash(const std::filesystem::path& file);
/// Concatenates data rows of CSVs with identical hashes and headers.
void merge_csv(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& output);

/// Workers requested through RPZ_WORKERS (0 when unset).
int workers_from_env();

}  // namespace rpz
