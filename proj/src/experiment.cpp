#include "rpz/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <map>
#include <set>
#include <sstream>

#include "rpz/kernels.hpp"
#include "rpz/parallel.hpp"
#include "rpz/rng.hpp"

namespace rpz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> k(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!k.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double parse_p(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return infinity_norm;
        throw ConfigError("basis p must be a number or \"inf\"");
    }
    return v.get<double>();
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read " + file.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

double default_p(BasisKind k) { return (k == BasisKind::fekete || k == BasisKind::faber) ? infinity_norm : 2.0; }

bool inside_shrunk(const Support& K, cplx z, double margin) {
    if (K.kind() == SupportKind::interval) return false;
    const double a = (K.kind() == SupportKind::circle ? K.radius() : K.alpha()) - margin;
    const double b = (K.kind() == SupportKind::circle ? K.radius() : K.beta()) - margin;
    if (b <= 0.0) return false;
    const double x = z.real() / a, y = z.imag() / b;
    return x * x + y * y < 1.0;
}

}  // namespace

// Configuration.

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"schema_version", "support", "measure", "basis", "distribution", "degrees", "trials", "master_seed",
                    "thresholds", "radii", "grid", "necessity", "checks", "output_dir"},
                   "config");
    ExperimentConfig c;
    const int sv = get_or<int>(j, "schema_version", schema_version);
    if (sv != schema_version) throw ConfigError("unsupported schema_version " + std::to_string(sv));
    try {
        if (j.contains("support")) c.support = build_support(j["support"]).to_json();
    } catch (const Error& e) {
        throw ConfigError(std::string("support: ") + e.what());
    }
    if (j.contains("measure")) {
        const auto& m = j["measure"];
        reject_unknown(m, {"density", "node_count"}, "measure");
        try {
            c.density = measure_density_from_string(get_or<std::string>(m, "density", to_string(c.density)));
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        if (m.contains("node_count") && !m["node_count"].is_null()) c.node_count = m["node_count"].get<int>();
    }
    if (j.contains("basis")) {
        const auto& b = j["basis"];
        reject_unknown(b, {"kind", "p", "N"}, "basis");
        try {
            c.basis_kind = basis_kind_from_string(get_or<std::string>(b, "kind", to_string(c.basis_kind)));
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        c.basis_p = b.contains("p") ? parse_p(b["p"]) : default_p(c.basis_kind);
        c.N = get_or<int>(b, "N", c.N);
    }
    if (j.contains("distribution")) {
        try {
            c.distribution = distribution_from_json(j["distribution"]).to_json();
        } catch (const Error& e) {
            throw ConfigError(std::string("distribution: ") + e.what());
        }
    }
    c.degrees = get_or<std::vector<int>>(j, "degrees", c.degrees);
    c.trials = get_or<int>(j, "trials", c.trials);
    c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed);
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        reject_unknown(t,
                       {"ks", "discrepancy", "mass_outside", "ks_monotone", "escape_frequency", "failed_fraction",
                        "lead_slope", "norm_slope"},
                       "thresholds");
        auto& T = c.thresholds;
        T.ks = get_or(t, "ks", T.ks);
        T.discrepancy = get_or(t, "discrepancy", T.discrepancy);
        T.mass_outside = get_or(t, "mass_outside", T.mass_outside);
        T.ks_monotone = get_or(t, "ks_monotone", T.ks_monotone);
        T.escape_frequency = get_or(t, "escape_frequency", T.escape_frequency);
        T.failed_fraction = get_or(t, "failed_fraction", T.failed_fraction);
        T.lead_slope = get_or(t, "lead_slope", T.lead_slope);
        T.norm_slope = get_or(t, "norm_slope", T.norm_slope);
    }
    c.radii = get_or<std::vector<double>>(j, "radii", c.radii);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        reject_unknown(g, {"margin", "rings", "points_per_ring"}, "grid");
        c.grid.margin = get_or(g, "margin", c.grid.margin);
        c.grid.rings = get_or(g, "rings", c.grid.rings);
        c.grid.points_per_ring = get_or(g, "points_per_ring", c.grid.points_per_ring);
    }
    if (j.contains("necessity")) {
        const auto& n = j["necessity"];
        reject_unknown(n, {"radius", "c_margin", "calibration_radii", "calibration_angles", "c", "control"},
                       "necessity");
        auto& S = c.necessity;
        S.radius = get_or(n, "radius", S.radius);
        S.c_margin = get_or(n, "c_margin", S.c_margin);
        S.calibration_radii = get_or(n, "calibration_radii", S.calibration_radii);
        S.calibration_angles = get_or(n, "calibration_angles", S.calibration_angles);
        if (n.contains("c") && !n["c"].is_null()) S.c_override = n["c"].get<double>();
        S.control = get_or(n, "control", S.control);
    }
    if (j.contains("checks")) {
        const auto& k = j["checks"];
        reject_unknown(k,
                       {"cartan_degrees", "cartan_instances", "cartan_samples", "cartan_h", "annulus_instances",
                        "annulus_degree", "annulus_root_radius", "annulus_r1", "annulus_r2", "annulus_radial",
                        "annulus_angular", "minimality_degree", "det_trials", "det_degree"},
                       "checks");
        auto& K = c.checks;
        K.cartan_degrees = get_or(k, "cartan_degrees", K.cartan_degrees);
        K.cartan_instances = get_or(k, "cartan_instances", K.cartan_instances);
        K.cartan_samples = get_or(k, "cartan_samples", K.cartan_samples);
        K.cartan_h = get_or(k, "cartan_h", K.cartan_h);
        K.annulus_instances = get_or(k, "annulus_instances", K.annulus_instances);
        K.annulus_degree = get_or(k, "annulus_degree", K.annulus_degree);
        K.annulus_root_radius = get_or(k, "annulus_root_radius", K.annulus_root_radius);
        K.annulus_r1 = get_or(k, "annulus_r1", K.annulus_r1);
        K.annulus_r2 = get_or(k, "annulus_r2", K.annulus_r2);
        K.annulus_radial = get_or(k, "annulus_radial", K.annulus_radial);
        K.annulus_angular = get_or(k, "annulus_angular", K.annulus_angular);
        K.minimality_degree = get_or(k, "minimality_degree", K.minimality_degree);
        K.det_trials = get_or(k, "det_trials", K.det_trials);
        K.det_degree = get_or(k, "det_degree", K.det_degree);
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());

    // Invariants.
    if (c.N < 1) throw ConfigError("basis N must be >= 1");
    if (c.degrees.empty()) throw ConfigError("degree schedule is empty");
    for (int n : c.degrees)
        if (n < 2 || n > c.N) throw ConfigError("degree " + std::to_string(n) + " outside [2, N=" + std::to_string(c.N) + "]");
    if (c.trials < 1) throw ConfigError("trials must be >= 1");
    if (c.radii.size() != 2 || !(c.radii[0] > 0.0 && c.radii[1] > 0.0)) throw ConfigError("radii must hold two positive values");
    const auto& T = c.thresholds;
    for (double t : {T.ks, T.discrepancy, T.mass_outside, T.escape_frequency, T.failed_fraction, T.lead_slope, T.norm_slope})
        if (!(t > 0.0)) throw ConfigError("thresholds must be positive");
    if (!(c.grid.margin > 0.0) || c.grid.rings < 1 || c.grid.points_per_ring < 1) throw ConfigError("invalid grid");
    if (!(c.necessity.radius > 0.0) || c.necessity.calibration_radii < 1 || c.necessity.calibration_angles < 8)
        throw ConfigError("invalid necessity settings");
    if (!(c.basis_p >= 1.0)) throw ConfigError("basis p must be >= 1");
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) { return from_json(read_json(file)); }

json ExperimentConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["support"] = support;
    j["measure"] = {{"density", rpz::to_string(density)}, {"node_count", node_count ? json(*node_count) : json(nullptr)}};
    j["basis"] = {{"kind", rpz::to_string(basis_kind)}, {"p", p_to_json(basis_p)}, {"N", N}};
    j["distribution"] = distribution;
    j["degrees"] = degrees;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    const auto& T = thresholds;
    j["thresholds"] = {{"ks", T.ks},
                       {"discrepancy", T.discrepancy},
                       {"mass_outside", T.mass_outside},
                       {"ks_monotone", T.ks_monotone},
                       {"escape_frequency", T.escape_frequency},
                       {"failed_fraction", T.failed_fraction},
                       {"lead_slope", T.lead_slope},
                       {"norm_slope", T.norm_slope}};
    j["radii"] = radii;
    j["grid"] = {{"margin", grid.margin}, {"rings", grid.rings}, {"points_per_ring", grid.points_per_ring}};
    const auto& S = necessity;
    j["necessity"] = {{"radius", S.radius},
                      {"c_margin", S.c_margin},
                      {"calibration_radii", S.calibration_radii},
                      {"calibration_angles", S.calibration_angles},
                      {"c", S.c_override ? json(*S.c_override) : json(nullptr)},
                      {"control", S.control}};
    const auto& K = checks;
    j["checks"] = {{"cartan_degrees", K.cartan_degrees},       {"cartan_instances", K.cartan_instances},
                   {"cartan_samples", K.cartan_samples},       {"cartan_h", K.cartan_h},
                   {"annulus_instances", K.annulus_instances}, {"annulus_degree", K.annulus_degree},
                   {"annulus_root_radius", K.annulus_root_radius}, {"annulus_r1", K.annulus_r1},
                   {"annulus_r2", K.annulus_r2},               {"annulus_radial", K.annulus_radial},
                   {"annulus_angular", K.annulus_angular},     {"minimality_degree", K.minimality_degree},
                   {"det_trials", K.det_trials},               {"det_degree", K.det_degree}};
    j["output_dir"] = output_dir.string();
    return j;
}

std::string ExperimentConfig::hash() const {
    json j = to_json();
    j.erase("output_dir");
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(mix64(h));
}

Support config_support(const ExperimentConfig& c) { return build_support(c.support); }

DiscretizedMeasure config_measure(const ExperimentConfig& c) {
    try {
        return reference_measure(config_support(c), c.density, c.node_count.value_or(default_node_count(c.N)));
    } catch (const CapabilityError& e) {
        throw ConfigError(e.what());
    }
}

Basis config_basis(const ExperimentConfig& c) {
    const Support K = config_support(c);
    switch (c.basis_kind) {
        case BasisKind::orthonormal:
            return orthonormal_basis(config_measure(c), c.N);
        case BasisKind::lp_minimal:
            return lp_minimal_basis(config_measure(c), c.basis_p, c.N);
        case BasisKind::fekete:
            return fekete_basis(K, c.N);
        case BasisKind::faber:
            return faber_basis(K, c.N);
    }
    throw ConfigError("unknown basis kind");
}

// CSV plumbing.

std::string csv_preamble(const std::string& hash) {
    return "# schema_version=" + std::to_string(schema_version) + " config_hash=" + hash + "\n";
}

std::string read_csv_hash(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    if (!in || !std::getline(in, line)) throw ConfigError("cannot read " + file.string());
    const auto pos = line.find("config_hash=");
    if (line.rfind("#", 0) != 0 || pos == std::string::npos) throw ConfigError(file.string() + ": missing config hash");
    return line.substr(pos + 12);
}

void merge_csv(const std::vector<fs::path>& inputs, const fs::path& output) {
    if (inputs.empty()) throw ConfigError("nothing to merge");
    std::string hash, header, body;
    for (const auto& f : inputs) {
        const std::string h = read_csv_hash(f);
        std::ifstream in(f);
        std::string line, hdr;
        std::getline(in, line);
        std::getline(in, hdr);
        if (hash.empty()) {
            hash = h;
            header = hdr;
        } else if (h != hash) {
            throw ConfigError("refusing to merge " + f.string() + ": config hash " + h + " differs from " + hash);
        } else if (hdr != header) {
            throw ConfigError("refusing to merge " + f.string() + ": header differs");
        }
        while (std::getline(in, line)) body += line + "\n";
    }
    write_text(output, csv_preamble(hash) + header + "\n" + body);
}

int workers_from_env() {
    const char* s = std::getenv("RPZ_WORKERS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("RPZ_WORKERS must be a positive integer, got '") + s + "'");
    return static_cast<int>(v);
}

Quantiles quantiles(std::vector<double> v) {
    if (v.empty()) return {std::nan(""), std::nan(""), std::nan("")};
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {q(0.5), q(0.25), q(0.75)};
}

// Convergence.

namespace {

struct TrialOutput {
    bool ok = false;
    std::string error;
    ConvergenceRow row;
    std::vector<cplx> roots;
    int D_n = 0;
    std::int64_t rescale = 0;
    int iterations = 0;
    double max_residual = 0.0;
    int saturated = 0;
};

json roots_json(const std::vector<cplx>& r) {
    json a = json::array();
    for (const auto& z : r) a.push_back({z.real(), z.imag()});
    return a;
}

json quantiles_json(const Quantiles& q) { return {{"median", q.median}, {"q25", q.q25}, {"q75", q.q75}}; }

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& c, bool write) {
    const Support K = config_support(c);
    const EquilibriumOracle oracle(K);
    const Basis basis = config_basis(c);
    const CoefficientDistribution dist = distribution_from_json(c.distribution);
    const auto grid = exterior_grid(K, c.grid);
    const Projection proj = default_projection(K);

    ConvergenceReport rep;
    if (!dist.in_prob_condition())
        rep.warnings.push_back("distribution " + to_string(dist.name()) +
                               " violates n T(n) -> 0; convergence is not expected");

    const std::size_t nd = c.degrees.size(), nt = static_cast<std::size_t>(c.trials);
    std::vector<TrialOutput> out(nd * nt);
    parallel_for(out.size(), [&](std::size_t idx) {
        const int n = c.degrees[idx / nt];
        const int t = static_cast<int>(idx % nt);
        TrialOutput& o = out[idx];
        o.row.n = n;
        o.row.trial = t;
        try {
            const auto g = sample_G(basis, dist, n, derive_seed(c.master_seed, static_cast<std::uint64_t>(t), "coefficients"));
            const auto r = roots(g.zeta);
            const auto m = zero_measure(r.roots, g.D_n);
            o.D_n = g.D_n;
            o.rescale = r.rescale_exponent;
            o.iterations = r.iterations;
            o.max_residual = r.max_residual();
            o.saturated = r.saturated;
            o.roots = r.roots;
            o.row.discrepancy = potential_discrepancy(m, oracle, grid);
            const auto ks = boundary_ks(m, oracle, proj);
            o.row.ks = ks.ks;
            o.row.im_mean = ks.im_mean;
            o.row.mass_r1 = mass_outside(m, c.radii[0]);
            o.row.mass_r2 = mass_outside(m, c.radii[1]);
            o.row.energy = m.points.size() >= 2 ? energy(m).value : std::nan("");
            o.row.interior_mass_defect = interior_mass(m, K, c.grid.margin);
            o.ok = true;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    });

    for (const auto& o : out) {
        if (o.ok)
            rep.rows.push_back(o.row);
        else
            rep.failures.push_back("n=" + std::to_string(o.row.n) + " trial=" + std::to_string(o.row.trial) + ": " + o.error);
    }
    for (std::size_t d = 0; d < nd; ++d) {
        ConvergenceSummaryRow s;
        s.n = c.degrees[d];
        std::vector<double> ks, disc, m1, m2, im, en;
        for (const auto& r : rep.rows) {
            if (r.n != s.n) continue;
            ks.push_back(r.ks);
            disc.push_back(r.discrepancy);
            m1.push_back(r.mass_r1);
            m2.push_back(r.mass_r2);
            im.push_back(r.im_mean);
            en.push_back(r.energy);
        }
        s.completed = static_cast<int>(ks.size());
        s.ks = quantiles(ks);
        s.discrepancy = quantiles(disc);
        s.mass_r1 = quantiles(m1);
        s.mass_r2 = quantiles(m2);
        s.im_mean = quantiles(im);
        s.energy = quantiles(en);
        rep.summary.push_back(s);
    }

    const auto& T = c.thresholds;
    const auto& last = rep.summary.back();
    if (!(last.ks.median < T.ks)) rep.violations.push_back("median ks " + num(last.ks.median) + " >= " + num(T.ks));
    if (!(last.discrepancy.median < T.discrepancy))
        rep.violations.push_back("median discrepancy " + num(last.discrepancy.median) + " >= " + num(T.discrepancy));
    if (!(last.mass_r1.median < T.mass_outside))
        rep.violations.push_back("median mass_outside(" + num(c.radii[0]) + ") " + num(last.mass_r1.median) +
                                 " >= " + num(T.mass_outside));
    if (T.ks_monotone)
        for (std::size_t d = 1; d < rep.summary.size(); ++d)
            if (rep.summary[d].ks.median > rep.summary[d - 1].ks.median)
                rep.violations.push_back("median ks increases from n=" + std::to_string(rep.summary[d - 1].n) +
                                         " to n=" + std::to_string(rep.summary[d].n));
    rep.thresholds_met = rep.violations.empty();
    const double failed = static_cast<double>(rep.failures.size()) / static_cast<double>(out.size());

    if (write) {
        const std::string hash = c.hash();
        std::string csv = csv_preamble(hash) + "n,trial,discrepancy,ks,mass_r1,mass_r2,im_mean,energy\n";
        for (const auto& r : rep.rows)
            csv += std::to_string(r.n) + "," + std::to_string(r.trial) + "," + num(r.discrepancy) + "," + num(r.ks) +
                   "," + num(r.mass_r1) + "," + num(r.mass_r2) + "," + num(r.im_mean) + "," + num(r.energy) + "\n";
        write_text(c.output_dir / "results.csv", csv);

        // Per-seed improvement along the schedule, the almost-sure surrogate.
        int improving = 0, seeds = 0;
        for (std::size_t t = 0; t < nt; ++t) {
            bool ok = true, mono = true;
            for (std::size_t d = 0; d < nd; ++d) {
                ok = ok && out[d * nt + t].ok;
                if (d > 0 && ok && out[d * nt + t].row.discrepancy > out[(d - 1) * nt + t].row.discrepancy) mono = false;
            }
            if (!ok) continue;
            ++seeds;
            improving += mono ? 1 : 0;
        }

        json j;
        j["schema_version"] = schema_version;
        j["config_hash"] = hash;
        j["config"] = c.to_json();
        j["report"] = "convergence";
        j["header"] =
            "Almost-sure convergence is not observable at finite n; per_seed_monotone_fraction reports the share of "
            "trials whose exterior discrepancy decreases along the whole schedule, and spike counts (spike_counter) "
            "separate the almost-sure and in-probability regimes.";
        j["projection"] = to_string(proj);
        j["per_seed_monotone_fraction"] = seeds ? static_cast<double>(improving) / seeds : 0.0;
        j["summary"] = json::array();
        for (const auto& s : rep.summary)
            j["summary"].push_back({{"n", s.n},
                                    {"completed", s.completed},
                                    {"ks", quantiles_json(s.ks)},
                                    {"discrepancy", quantiles_json(s.discrepancy)},
                                    {"mass_r1", quantiles_json(s.mass_r1)},
                                    {"mass_r2", quantiles_json(s.mass_r2)},
                                    {"im_mean", quantiles_json(s.im_mean)},
                                    {"energy", quantiles_json(s.energy)}});
        j["trials"] = json::array();
        for (const auto& o : out) {
            if (!o.ok) continue;
            j["trials"].push_back({{"n", o.row.n},
                                   {"trial", o.row.trial},
                                   {"D_n", o.D_n},
                                   {"rescale_exponent", o.rescale},
                                   {"iterations", o.iterations},
                                   {"max_residual", o.max_residual},
                                   {"saturated", o.saturated},
                                   {"interior_mass_defect", o.row.interior_mass_defect},
                                   {"roots", roots_json(o.roots)}});
        }
        j["failures"] = rep.failures;
        j["warnings"] = rep.warnings;
        j["violations"] = rep.violations;
        j["thresholds_met"] = rep.thresholds_met;
        write_text(c.output_dir / "results.json", j.dump(1) + "\n");
    }
    if (failed > c.thresholds.failed_fraction)
        throw Error(std::to_string(rep.failures.size()) + " of " + std::to_string(out.size()) +
                    " trials failed (limit " + num(100.0 * c.thresholds.failed_fraction) + "%)");
    return rep;
}

// Necessity.

Calibration calibrate_c(const Basis& basis, int n, const NecessitySettings& s) {
    if (n < 4) throw ConfigError("necessity calibration needs n >= 4");
    if (n > basis.degree_max()) throw ConfigError("n exceeds basis degree");
    const int j_lo = (n + 3) / 4, j_hi = n / 2;
    const int R = s.calibration_radii, M = s.calibration_angles;
    // |p_i| on every candidate circle.
    std::vector<std::vector<double>> mod(static_cast<std::size_t>(R) * M);
    parallel_for(mod.size(), [&](std::size_t idx) {
        const int k = static_cast<int>(idx / M), a = static_cast<int>(idx % M);
        const double rho = s.radius + static_cast<double>(k + 1) / (R + 1);
        const auto v = basis.evaluate(std::polar(rho, 2.0 * std::numbers::pi * a / M));
        auto& m = mod[idx];
        m.resize(n + 1);
        for (int i = 0; i <= n; ++i) m[i] = std::abs(v[i]);
    });
    Calibration cal;
    const double inf = std::numeric_limits<double>::infinity();
    for (int j = j_lo; j <= j_hi; ++j) {
        double best = inf, best_rho = 0.0;
        for (int k = 0; k < R; ++k) {
            double worst = -inf;
            for (int a = 0; a < M; ++a) {
                const auto& m = mod[static_cast<std::size_t>(k) * M + a];
                double rest = 0.0;
                for (int i = 0; i <= n; ++i)
                    if (i != j) rest += m[i];
                worst = std::max(worst, (std::log(rest) - std::log(m[j])) / n);
            }
            if (std::isfinite(worst) && worst < best) {
                best = worst;
                best_rho = s.radius + static_cast<double>(k + 1) / (R + 1);
            }
        }
        if (!std::isfinite(best)) {
            std::vector<cplx> pj(basis.coeffs()[j].begin(), basis.coeffs()[j].end());
            const auto af = annulus_floor(pj, s.radius, s.radius + 1.0, R, M);
            throw ConfigError("calibration failed for j=" + std::to_string(j) + ": annulus floor log " +
                              num(af.log_floor) + " at radius " + num(af.best_radius) + " (threshold " +
                              num(af.log_threshold) + ")");
        }
        // The circle must enclose every zero of p_j.
        std::vector<cplx> pj(basis.coeffs()[j].begin(), basis.coeffs()[j].end());
        const auto rj = roots(std::span<const cplx>(pj));
        for (const auto& z : rj.roots)
            if (std::abs(z) >= best_rho)
                throw ConfigError("calibration failed: p_" + std::to_string(j) + " has a zero outside radius " + num(best_rho));
        cal.c_j.push_back(best);
        cal.radius_j.push_back(best_rho);
    }
    cal.c = *std::max_element(cal.c_j.begin(), cal.c_j.end()) + s.c_margin;
    for (int a = 0; a < M; ++a) {
        const auto v = basis.evaluate(std::polar(s.radius, 2.0 * std::numbers::pi * a / M));
        for (int i = 1; i <= n; ++i) cal.b_r = std::max(cal.b_r, std::pow(std::abs(v[i]), 1.0 / i));
    }
    return cal;
}

NecessityReport run_necessity(const ExperimentConfig& c, bool write) {
    const Basis basis = config_basis(c);
    const CoefficientDistribution dist = distribution_from_json(c.distribution);
    const auto& S = c.necessity;
    const bool light = dist.log_moment_finite() && dist.in_prob_condition();
    if (light && !S.control)
        throw ConfigError("distribution " + to_string(dist.name()) +
                          " satisfies both tail conditions; set necessity.control to run it as a control");
    NecessityReport rep;
    std::vector<Calibration> cals;
    for (int n : c.degrees) {
        Calibration cal;
        if (S.c_override) {
            cal.c = *S.c_override;
        } else {
            cal = calibrate_c(basis, n, S);
        }
        cals.push_back(cal);
        NecessityRow row;
        row.n = n;
        row.c = cal.c;
        row.b_r = cal.b_r;
        const auto ef = dominance_event_frequency(dist, n, cal.c, c.trials, c.master_seed);
        row.freq_A = ef.freq_A;
        row.freq_B = ef.freq_B;

        struct T {
            bool ok = false, b = false, escape = false;
        };
        std::vector<T> tr(static_cast<std::size_t>(c.trials));
        parallel_for(tr.size(), [&](std::size_t t) {
            try {
                const auto g = sample_G(basis, dist, n, derive_seed(c.master_seed, t, "coefficients"));
                std::vector<double> la(n + 1);
                for (int i = 0; i <= n; ++i) la[i] = g.xi[i].log_abs();
                tr[t].b = event_B(la, n, cal.c);
                const auto r = roots(g.zeta);
                const auto m = zero_measure(r.roots, g.D_n);
                tr[t].escape = mass_outside(m, S.radius) >= 0.5;
                tr[t].ok = true;
            } catch (const std::exception&) {
                tr[t].ok = false;
            }
        });
        for (const auto& t : tr) {
            if (!t.ok) {
                ++row.failed;
                continue;
            }
            ++row.completed;
            row.b_count += t.b;
            row.escape_count += t.escape;
            row.counterexamples += (t.b && !t.escape);
        }
        row.escape_frequency = row.completed ? static_cast<double>(row.escape_count) / row.completed : 0.0;
        rep.rows.push_back(row);
    }

    double best = 0.0;
    for (const auto& r : rep.rows) {
        best = std::max(best, r.escape_frequency);
        if (r.counterexamples > 0)
            rep.violations.push_back(std::to_string(r.counterexamples) + " trials at n=" + std::to_string(r.n) +
                                     " have B_{n,c} without mass escape");
        if (r.failed > c.thresholds.failed_fraction * c.trials)
            rep.violations.push_back(std::to_string(r.failed) + " failed trials at n=" + std::to_string(r.n));
        if (light && r.escape_count > 0)
            rep.violations.push_back("control run escaped at n=" + std::to_string(r.n));
    }
    if (!light && !(best > c.thresholds.escape_frequency))
        rep.violations.push_back("escape frequency never exceeds " + num(c.thresholds.escape_frequency));
    if (light) rep.warnings.push_back("control run: escape frequency must stay zero");
    rep.thresholds_met = rep.violations.empty();

    if (write) {
        const std::string hash = c.hash();
        std::string csv = csv_preamble(hash) +
                          "n,c,freq_A,freq_B,b_count,escape_count,escape_frequency,counterexamples,b_r,completed,failed\n";
        for (const auto& r : rep.rows)
            csv += std::to_string(r.n) + "," + num(r.c) + "," + num(r.freq_A) + "," + num(r.freq_B) + "," +
                   std::to_string(r.b_count) + "," + std::to_string(r.escape_count) + "," + num(r.escape_frequency) +
                   "," + std::to_string(r.counterexamples) + "," + num(r.b_r) + "," + std::to_string(r.completed) +
                   "," + std::to_string(r.failed) + "\n";
        write_text(c.output_dir / "necessity.csv", csv);
        json j;
        j["schema_version"] = schema_version;
        j["config_hash"] = hash;
        j["config"] = c.to_json();
        j["report"] = "necessity";
        j["calibration"] = json::array();
        for (std::size_t k = 0; k < cals.size(); ++k)
            j["calibration"].push_back(
                {{"n", c.degrees[k]}, {"c", cals[k].c}, {"c_j", cals[k].c_j}, {"radius_j", cals[k].radius_j}, {"b_r", cals[k].b_r}});
        j["rows"] = json::array();
        for (const auto& r : rep.rows)
            j["rows"].push_back({{"n", r.n},
                                 {"c", r.c},
                                 {"freq_A", r.freq_A},
                                 {"freq_B", r.freq_B},
                                 {"b_count", r.b_count},
                                 {"escape_count", r.escape_count},
                                 {"escape_frequency", r.escape_frequency},
                                 {"counterexamples", r.counterexamples},
                                 {"b_r", r.b_r},
                                 {"completed", r.completed},
                                 {"failed", r.failed}});
        j["warnings"] = rep.warnings;
        j["violations"] = rep.violations;
        j["thresholds_met"] = rep.thresholds_met;
        write_text(c.output_dir / "necessity.json", j.dump(1) + "\n");
    }
    return rep;
}

// Lemma and certificate checks.

ChecksReport run_checks(const ExperimentConfig& c, bool write) {
    ChecksReport rep;
    const auto& K = c.checks;
    auto add = [&](std::string check, std::string inst, double value, double bound, bool pass) {
        rep.rows.push_back({std::move(check), std::move(inst), value, bound, pass});
    };

    for (int deg : K.cartan_degrees) {
        for (int i = 0; i < K.cartan_instances; ++i) {
            const std::uint64_t seed = derive_seed(c.master_seed, static_cast<std::uint64_t>(deg) * 100000 + i, "cartan");
            const CounterRng rng(seed);
            std::vector<cplx> rts(deg);
            for (int k = 0; k < deg; ++k) rts[k] = {rng.normal(k, 0), rng.normal(k, 1)};
            const double h = K.cartan_h[static_cast<std::size_t>(i) % K.cartan_h.size()];
            const auto r = cartan_check_roots(rts, h, K.cartan_samples, hash_combine(seed, 1));
            add("cartan", "deg=" + std::to_string(deg) + " #" + std::to_string(i) + " h=" + num(h), r.area, r.bound, r.pass);
        }
    }
    for (int i = 0; i < K.annulus_instances; ++i) {
        const CounterRng rng(derive_seed(c.master_seed, static_cast<std::uint64_t>(i), "annulus"));
        std::vector<cplx> rts(K.annulus_degree);
        for (int k = 0; k < K.annulus_degree; ++k)
            rts[k] = std::polar(K.annulus_root_radius * std::sqrt(rng.uniform(k, 0)), 2.0 * std::numbers::pi * rng.uniform(k, 1));
        const auto r = annulus_floor_roots(rts, K.annulus_r1, K.annulus_r2, K.annulus_radial, K.annulus_angular);
        add("annulus", "#" + std::to_string(i), r.log_floor, r.log_threshold, r.pass);
    }

    const std::vector<Support> builtins{Support::circle(1.0), Support::interval(-2.0, 2.0), Support::interval(-1.0, 1.0),
                                        Support::ellipse(1.25, 0.75)};
    for (const auto& S : builtins) {
        const EquilibriumOracle o(S);
        const double robin = -std::log(S.capacity());
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& z : exterior_grid(S, GridSpec{0.2, 2, 100})) worst = std::max(worst, o.potential(z) - robin);
        add("oracle_exterior", S.to_json().dump(), worst, 1e-9, worst <= 1e-9);
        if (S.interior_flag()) {
            double dev = 0.0;
            for (const auto& z : interior_grid(S, 0.9, 8, 32)) dev = std::max(dev, std::abs(o.potential(z) - robin));
            add("oracle_interior", S.to_json().dump(), dev, 1e-9, dev <= 1e-9);
        }
    }

    {
        const Support S = Support::circle(1.0);
        const int N = K.minimality_degree;
        const auto meas = default_measure(S, N);
        std::vector<std::pair<std::string, Basis>> bases;
        bases.emplace_back("orthonormal", orthonormal_basis(meas, N));
        bases.emplace_back("lp_minimal(p=1)", lp_minimal_basis(meas, 1.0, N));
        bases.emplace_back("fekete", fekete_basis(S, N));
        bases.emplace_back("faber", faber_basis(S, N));
        for (const auto& [name, b] : bases) {
            const auto r = minimality_report(b, b.measure(), b.norm_exponent());
            const double lead = r.lead_slope.back(), norm = r.norm_slope.back();
            add("minimality_lead", "circle(1) " + name, std::abs(lead), c.thresholds.lead_slope,
                std::abs(lead) <= c.thresholds.lead_slope);
            add("minimality_norm", "circle(1) " + name, norm, c.thresholds.norm_slope, norm <= c.thresholds.norm_slope);
        }
    }

    {
        const Support S = Support::circle(1.0);
        const int n = K.det_degree;
        const Basis b = orthonormal_basis(default_measure(S, n), n);
        const auto interior = interior_grid(S, 0.8, 8, 64);
        const auto raw = det_criterion_report(b, b.measure(), 2.0, 0, interior);
        add("det_monomials_fail_ii", "circle(1) i_n=0 n=" + std::to_string(n), raw.rows.back().c2, 0.0, raw.rows.back().c2 < 0.0);
        const auto dist = make_distribution("gaussian");
        std::vector<double> c2(static_cast<std::size_t>(K.det_trials));
        for (int t = 0; t < K.det_trials; ++t) {
            const auto g = sample_G(b, dist, n, derive_seed(c.master_seed, static_cast<std::uint64_t>(t), "det"));
            c2[t] = det_criterion_row(b, g, b.measure(), 2.0, interior).c2;
        }
        const double frac = static_cast<double>(std::count_if(c2.begin(), c2.end(), [](double v) { return v >= -0.2; })) /
                            K.det_trials;
        add("det_random_c2", "gaussian circle n=" + std::to_string(n), frac, 0.9, frac >= 0.9);
        const Support I = Support::interval(-2.0, 2.0);
        const Basis bi = orthonormal_basis(default_measure(I, 16), 16);
        const auto vi = det_criterion_report(bi, bi.measure(), 2.0, 0, {});
        add("det_vacuous_interval", "interval(-2,2)", vi.vacuous_interior ? 1.0 : 0.0, 1.0, vi.vacuous_interior);
    }

    rep.all_pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const CheckRow& r) { return r.pass; });
    if (write) {
        const std::string hash = c.hash();
        std::string csv = csv_preamble(hash) + "check,instance,value,bound,pass\n";
        for (const auto& r : rep.rows) {
            std::string inst = r.instance;
            std::replace(inst.begin(), inst.end(), ',', ';');
            std::replace(inst.begin(), inst.end(), '"', '\'');
            csv += r.check + "," + inst + "," + num(r.value) + "," + num(r.bound) + "," + (r.pass ? "1" : "0") + "\n";
        }
        write_text(c.output_dir / "checks.csv", csv);
        json j;
        j["schema_version"] = schema_version;
        j["config_hash"] = hash;
        j["config"] = c.to_json();
        j["report"] = "checks";
        std::map<std::string, std::pair<int, int>> table;
        for (const auto& r : rep.rows) {
            auto& e = table[r.check];
            ++e.first;
            e.second += r.pass;
        }
        j["summary"] = json::array();
        for (const auto& [k, v] : table) j["summary"].push_back({{"check", k}, {"instances", v.first}, {"passed", v.second}});
        j["all_pass"] = rep.all_pass;
        write_text(c.output_dir / "checks.json", j.dump(1) + "\n");
    }
    return rep;
}

// Plot data.

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "zero_scatter") return PlotKind::zero_scatter;
    if (s == "potential_heatmap") return PlotKind::potential_heatmap;
    if (s == "metric_vs_n") return PlotKind::metric_vs_n;
    throw ValidationError("unknown plot kind '" + s + "'");
}

std::string to_string(PlotKind k) {
    switch (k) {
        case PlotKind::zero_scatter:
            return "zero_scatter";
        case PlotKind::potential_heatmap:
            return "potential_heatmap";
        case PlotKind::metric_vs_n:
            return "metric_vs_n";
    }
    return "unknown";
}

std::vector<fs::path> emit_plot_data(const fs::path& dir, PlotKind kind) {
    const fs::path src = dir / "results.json";
    if (!fs::exists(src)) throw ValidationError("no report at " + src.string() + "; run converge first");
    const json j = read_json(src);
    const std::string hash = j.at("config_hash").get<std::string>();
    const std::string pre = csv_preamble(hash);
    std::vector<fs::path> written;

    if (kind == PlotKind::zero_scatter) {
        std::string csv = pre + "re,im,n,trial\n";
        for (const auto& t : j.at("trials"))
            for (const auto& z : t.at("roots"))
                csv += num(z[0].get<double>()) + "," + num(z[1].get<double>()) + "," + std::to_string(t.at("n").get<int>()) +
                       "," + std::to_string(t.at("trial").get<int>()) + "\n";
        written.push_back(dir / "plots" / "zero_scatter.csv");
        write_text(written.back(), csv);
    } else if (kind == PlotKind::metric_vs_n) {
        for (const char* metric : {"ks", "discrepancy", "mass_r1", "mass_r2", "im_mean", "energy"}) {
            std::string csv = pre + "n,median,q25,q75\n";
            for (const auto& s : j.at("summary")) {
                const auto& q = s.at(metric);
                auto val = [](const json& v) { return v.is_null() ? std::string("nan") : num(v.get<double>()); };
                csv += std::to_string(s.at("n").get<int>()) + "," + val(q.at("median")) + "," + val(q.at("q25")) + "," +
                       val(q.at("q75")) + "\n";
            }
            written.push_back(dir / "plots" / (std::string("metric_vs_n_") + metric + ".csv"));
            write_text(written.back(), csv);
        }
    } else {
        const ExperimentConfig c = ExperimentConfig::from_json(j.at("config"));
        const Support K = config_support(c);
        const EquilibriumOracle o(K);
        // Largest n, lowest trial.
        const json* pick = nullptr;
        for (const auto& t : j.at("trials"))
            if (!pick || t.at("n").get<int>() > pick->at("n").get<int>() ||
                (t.at("n") == pick->at("n") && t.at("trial").get<int>() < pick->at("trial").get<int>()))
                pick = &t;
        if (!pick) throw ValidationError("report holds no completed trials");
        EmpiricalMeasure m;
        for (const auto& z : pick->at("roots")) m.points.emplace_back(z[0].get<double>(), z[1].get<double>());
        m.count = static_cast<int>(m.points.size());
        double extent = 0.0;
        for (const auto& z : boundary_grid(K, 256)) extent = std::max(extent, std::abs(z));
        const double R = extent + 4.0 * c.grid.margin;
        constexpr int G = 101;
        std::vector<cplx> pts;
        for (int a = 0; a < G; ++a)
            for (int b = 0; b < G; ++b) {
                const cplx z(-R + 2.0 * R * b / (G - 1), -R + 2.0 * R * a / (G - 1));
                const double d = K.distance_to_hull(z);
                const bool outer_band = d > 0.0 && d < c.grid.margin;
                const bool on_or_near = d == 0.0 && !inside_shrunk(K, z, c.grid.margin);
                if (!outer_band && !on_or_near) pts.push_back(z);
            }
        const auto emp = kernels::omp::empirical_potential(m.points, pts);
        std::string csv = pre + "re,im,diff\n";
        for (std::size_t i = 0; i < pts.size(); ++i)
            csv += num(pts[i].real()) + "," + num(pts[i].imag()) + "," + num(emp[i] - o.potential(pts[i])) + "\n";
        written.push_back(dir / "plots" / "potential_heatmap.csv");
        write_text(written.back(), csv);
    }
    return written;
}

}  // namespace rpz
