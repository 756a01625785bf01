// rpz_cli: bases, random polynomials, roots and the convergence experiments.
//
// Exit codes: 0 thresholds met, 2 thresholds violated, 3 infrastructure or
// configuration error. RPZ_WORKERS (or --workers) sets the thread count.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpz/experiment.hpp"
#include "rpz/parallel.hpp"

using nlohmann::json;
using namespace rpz;

namespace {

struct Overrides {
    std::string config;
    std::string output;
    std::string support;
    std::string basis;
    std::string basis_p;
    int N = 0;
    std::string distribution;
    std::vector<int> degrees;
    int trials = 0;
    long long seed = -1;
    bool control = false;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config, "JSON config file");
    app->add_option("-o,--output", o.output, "output directory");
    app->add_option("--support", o.support, "support descriptor as JSON, e.g. '{\"kind\":\"interval\",\"params\":{\"a\":-2,\"b\":2}}'");
    app->add_option("--basis", o.basis, "orthonormal | lp_minimal | fekete | faber");
    app->add_option("--p", o.basis_p, "norm exponent for lp_minimal (number or inf)");
    app->add_option("-N,--max-degree", o.N, "basis degree");
    app->add_option("--distribution", o.distribution, "coefficient law name");
    app->add_option("--degrees", o.degrees, "degree schedule")->delimiter(',');
    app->add_option("--trials", o.trials, "trials per degree");
    app->add_option("--seed", o.seed, "master seed");
    app->add_flag("--control", o.control, "allow light-tailed laws in necessity runs");
}

ExperimentConfig resolve(const Overrides& o) {
    json j = json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw ConfigError("cannot read config " + o.config);
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(o.config + ": " + e.what());
        }
    }
    if (!o.output.empty()) j["output_dir"] = o.output;
    if (!o.support.empty()) {
        try {
            j["support"] = json::parse(o.support);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("--support: ") + e.what());
        }
    }
    if (!o.basis.empty()) j["basis"]["kind"] = o.basis;
    if (!o.basis_p.empty()) j["basis"]["p"] = o.basis_p == "inf" ? json("inf") : json(std::stod(o.basis_p));
    if (o.N > 0) j["basis"]["N"] = o.N;
    if (!o.distribution.empty()) j["distribution"] = {{"name", o.distribution}};
    if (!o.degrees.empty()) j["degrees"] = o.degrees;
    if (o.trials > 0) j["trials"] = o.trials;
    if (o.seed >= 0) j["master_seed"] = static_cast<std::uint64_t>(o.seed);
    if (o.control) j["necessity"]["control"] = true;
    return ExperimentConfig::from_json(j);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

json scaled_json(const std::vector<ScaledComplex>& v) {
    json a = json::array();
    for (const auto& s : v) a.push_back({s.mant.real(), s.mant.imag(), s.exp2});
    return a;
}

int cmd_basis(const Overrides& o) {
    const auto c = resolve(o);
    const Basis b = config_basis(c);
    write_file(c.output_dir / "basis.json", b.to_json().dump(1) + "\n");
    if (b.degree_max() >= 8) {
        const auto r = minimality_report(b, b.measure(), b.norm_exponent());
        std::string csv = csv_preamble(c.hash()) + "n,window,lead_slope,norm_slope,near_lead_slope,near_lead_slope_min\n";
        for (std::size_t k = 0; k < r.n.size(); ++k) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g\n", r.n[k], r.window[k], r.lead_slope[k],
                          r.norm_slope[k], r.near_lead_slope[k], r.near_lead_slope_min[k]);
            csv += buf;
        }
        write_file(c.output_dir / "minimality.csv", csv);
        std::printf("lead_slope(%d) = %.6g  norm_slope(%d) = %.6g\n", b.degree_max(), r.lead_slope.back(), b.degree_max(),
                    r.norm_slope.back());
    }
    std::printf("wrote %s\n", (c.output_dir / "basis.json").c_str());
    return exit_ok;
}

int cmd_sample(const Overrides& o, int n) {
    const auto c = resolve(o);
    const Basis b = config_basis(c);
    const auto dist = distribution_from_json(c.distribution);
    const int deg = n > 0 ? n : c.degrees.back();
    const auto g = sample_G(b, dist, deg, derive_seed(c.master_seed, 0, "coefficients"));
    json j{{"schema_version", schema_version},
           {"config_hash", c.hash()},
           {"n", g.n},
           {"D_n", g.D_n},
           {"distribution", dist.to_json()},
           {"format", "[mantissa_re, mantissa_im, binary_exponent]"},
           {"xi", scaled_json(g.xi)},
           {"zeta", scaled_json(g.zeta)}};
    write_file(c.output_dir / "sample.json", j.dump(1) + "\n");
    std::printf("n=%d D_n=%d L_n=%.6g written to %s\n", g.n, g.D_n,
                max_log_stat(std::span<const ScaledComplex>(g.xi).subspan(1)), (c.output_dir / "sample.json").c_str());
    return exit_ok;
}

std::vector<ScaledComplex> read_coefficients(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read " + file);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(file + ": " + e.what());
    }
    const json& a = j.is_object() ? j.at("zeta") : j;
    std::vector<ScaledComplex> z;
    for (const auto& e : a) {
        if (!e.is_array() || e.size() < 2) throw ValidationError("coefficients must be [re, im] or [re, im, exp2]");
        const cplx m(e[0].get<double>(), e[1].get<double>());
        z.emplace_back(m, e.size() > 2 ? e[2].get<std::int64_t>() : 0);
    }
    return z;
}

int cmd_roots(const std::string& input, const std::string& output) {
    const auto zeta = read_coefficients(input);
    RootResult r;
    bool partial = false;
    try {
        r = roots(zeta);
    } catch (const RootError& e) {
        r = e.partial;
        partial = true;
    }
    const auto v = vieta_check(zeta, r.scaled);
    std::string csv = "re,im\n";
    for (const auto& z : r.roots) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
        csv += buf;
    }
    const std::filesystem::path dir = output.empty() ? "." : output;
    write_file(dir / "roots.csv", csv);
    json d{{"schema_version", schema_version},
           {"degree", r.degree},
           {"iterations", r.iterations},
           {"max_residual", r.max_residual()},
           {"rescale_exponent", r.rescale_exponent},
           {"saturated", r.saturated},
           {"groups", r.groups},
           {"converged", !partial},
           {"vieta", {{"sum_error", v.sum_error}, {"log_abs_error", v.log_abs_error}, {"arg_error", v.arg_error}, {"flagged", v.flagged}}}};
    write_file(dir / "roots.json", d.dump(1) + "\n");
    std::printf("%d roots, %d sweeps, max residual %.3g%s\n", r.degree, r.iterations, r.max_residual(),
                partial ? " (not converged)" : "");
    return partial ? exit_infrastructure : exit_ok;
}

int report_violations(const std::vector<std::string>& warnings, const std::vector<std::string>& violations) {
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& v : violations) std::fprintf(stderr, "threshold: %s\n", v.c_str());
    return violations.empty() ? exit_ok : exit_thresholds;
}

int cmd_converge(const Overrides& o) {
    const auto c = resolve(o);
    const auto r = run_convergence(c);
    std::printf("%6s %10s %12s %10s %10s %10s\n", "n", "ks", "discrepancy", "mass_r1", "mass_r2", "im_mean");
    for (const auto& s : r.summary)
        std::printf("%6d %10.4g %12.4g %10.4g %10.4g %10.4g\n", s.n, s.ks.median, s.discrepancy.median, s.mass_r1.median,
                    s.mass_r2.median, s.im_mean.median);
    for (const auto& f : r.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
    return report_violations(r.warnings, r.violations);
}

int cmd_necessity(const Overrides& o) {
    const auto c = resolve(o);
    const auto r = run_necessity(c);
    std::printf("%6s %8s %8s %8s %8s %10s %8s\n", "n", "c", "freq_A", "freq_B", "B", "escape", "counter");
    for (const auto& row : r.rows)
        std::printf("%6d %8.4f %8.4f %8.4f %8d %10.4f %8d\n", row.n, row.c, row.freq_A, row.freq_B, row.b_count,
                    row.escape_frequency, row.counterexamples);
    return report_violations(r.warnings, r.violations);
}

int cmd_checks(const Overrides& o) {
    const auto c = resolve(o);
    const auto r = run_checks(c);
    std::map<std::string, std::pair<int, int>> table;
    for (const auto& row : r.rows) {
        auto& e = table[row.check];
        ++e.first;
        e.second += row.pass;
    }
    std::printf("%-24s %9s %7s\n", "check", "instances", "passed");
    for (const auto& [k, v] : table) std::printf("%-24s %9d %7d\n", k.c_str(), v.first, v.second);
    return r.all_pass ? exit_ok : exit_thresholds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random polynomial zeros on compact planar sets"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (default: RPZ_WORKERS or all cores)");

    Overrides o;
    auto* basis = app.add_subcommand("basis", "build a basis and its minimality report");
    add_common(basis, o);
    auto* sample = app.add_subcommand("sample", "draw one random polynomial");
    add_common(sample, o);
    int sample_n = 0;
    sample->add_option("-n", sample_n, "degree (default: last of the schedule)");
    auto* rts = app.add_subcommand("roots", "solve a polynomial given as JSON coefficients");
    std::string input, rout;
    rts->add_option("input", input, "JSON array of [re, im] or [re, im, exp2], constant term first")->required();
    rts->add_option("-o,--output", rout, "output directory");
    auto* conv = app.add_subcommand("converge", "sufficiency sweep");
    add_common(conv, o);
    auto* nec = app.add_subcommand("necessity", "necessity sweep with calibrated c");
    add_common(nec, o);
    auto* chk = app.add_subcommand("checks", "lemma and certificate checks");
    add_common(chk, o);
    auto* plot = app.add_subcommand("plot", "emit plot data from a convergence report");
    std::string plot_dir = "out", plot_kind;
    plot->add_option("-o,--output", plot_dir, "report directory");
    plot->add_option("kind", plot_kind, "zero_scatter | potential_heatmap | metric_vs_n | all")->required();
    auto* merge = app.add_subcommand("merge", "concatenate CSVs that share a config hash");
    std::vector<std::string> merge_in;
    std::string merge_out;
    merge->add_option("inputs", merge_in, "CSV files")->required();
    merge->add_option("-o,--output", merge_out, "merged CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_infrastructure;
    }

    try {
        set_workers(workers > 0 ? workers : workers_from_env());
        if (*basis) return cmd_basis(o);
        if (*sample) return cmd_sample(o, sample_n);
        if (*rts) return cmd_roots(input, rout);
        if (*conv) return cmd_converge(o);
        if (*nec) return cmd_necessity(o);
        if (*chk) return cmd_checks(o);
        if (*plot) {
            std::vector<PlotKind> kinds;
            if (plot_kind == "all")
                kinds = {PlotKind::zero_scatter, PlotKind::potential_heatmap, PlotKind::metric_vs_n};
            else
                kinds = {plot_kind_from_string(plot_kind)};
            for (auto k : kinds)
                for (const auto& f : emit_plot_data(plot_dir, k)) std::printf("wrote %s\n", f.c_str());
            return exit_ok;
        }
        if (*merge) {
            std::vector<std::filesystem::path> in(merge_in.begin(), merge_in.end());
            merge_csv(in, merge_out);
            return exit_ok;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_infrastructure;
    }
    return exit_infrastructure;
}
