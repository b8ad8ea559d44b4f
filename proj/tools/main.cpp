// sced: scenario-compressed chance-constrained dispatch toolkit.
//
// Subcommands: solve, compress, certify, tune, bounds-table.
// Exit codes: 0 success, 2 config error, 3 parse/validation error,
// 4 solver reported infeasible/unbounded, 5 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sced/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitSolver = 4;
constexpr int kExitNumerical = 5;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw sced::IoError("cannot write " + out_path);
    f << text;
}

struct CommonOpts {
    sced::RunConfig config;
    std::string method_str = "none";

    void attach(CLI::App* cmd, bool with_method = true) {
        cmd->add_option("--case", config.case_path, "case file (see docs/case-format.md)")
            ->required();
        cmd->add_option("--scenarios", config.scenario_csv,
                        "scenario CSV; omit to sample Gaussian regional factors");
        cmd->add_option("--csv-space", config.csv_space,
                        "CSV column meaning: auto | factors | farms");
        cmd->add_option("-n,--n", config.n, "training scenario count N");
        cmd->add_option("--seed", config.seed, "master seed");
        if (with_method)
            cmd->add_option("--method", method_str, "none | hull | box | hull-dual");
        cmd->add_option("--beta", config.beta, "confidence parameter in (0,1)");
        cmd->add_option("--key-line-threshold", config.key_line_threshold,
                        "line loading threshold in (0,1]; 0 = automatic");
        cmd->add_option("--holdout", config.holdout, "holdout size for empirical risk");
        cmd->add_option("--repetitions", config.repetitions, "independent repetitions");
        cmd->add_option("-o,--out", config.output_path, "output path (default stdout)");
        cmd->add_flag_callback(
            "--no-complexity", [this] { config.compute_complexity = false; },
            "skip support-scenario probing");
        cmd->add_flag("--eta-nonnegative", config.eta_nonnegative,
                      "restrict participation factors to be nonnegative");
    }

    sced::RunConfig finalize() {
        config.method = sced::method_from_string(method_str);
        return config;
    }
};

int run_solve(CommonOpts& opts) {
    sced::RunConfig config = opts.finalize();
    const std::string out = config.output_path;
    config.output_path.clear();
    const sced::RunReport report = sced::run(config);
    emit(sced::report_to_json(report), out);
    for (const auto& r : report.repetitions)
        if (r.status != sced::LPStatus::Optimal) return kExitSolver;
    return kExitOk;
}

int run_compress(CommonOpts& opts) {
    sced::RunConfig config = opts.finalize();
    if (config.method != sced::Method::Hull && config.method != sced::Method::Box)
        throw sced::ConfigError("compress: method must be hull or box");
    config.validate();

    const sced::GridCase grid = sced::parse_case(config.case_path);
    if (grid.num_wind() == 0) throw sced::ConfigError("case has no wind farms");
    sced::Vec sigmas(grid.num_regions());
    for (std::size_t q = 0; q < grid.num_regions(); ++q)
        sigmas[q] = grid.regions[q].sigma;

    sced::ScenarioSet factors;
    if (config.scenario_csv.empty()) {
        factors = sced::sample_gaussian_regions(sigmas, config.n, config.seed);
    } else {
        factors = sced::load_scenarios_csv(config.scenario_csv, grid.num_regions());
    }

    std::ostringstream body;
    std::size_t k_c = 0;
    if (config.method == sced::Method::Hull) {
        const sced::Polytope hull = sced::convex_hull(factors);
        k_c = hull.num_vertices();
        body << sced::polytope_to_json(hull);
    } else {
        const sced::Box box = sced::box_hull(factors);
        k_c = box.touching.size();
        body << sced::box_to_json(box);
    }
    const sced::RiskCertificate cert = sced::certify(
        sced::CertificateKind::Compression, k_c, factors.size(), config.beta);
    body << sced::certificate_to_json(cert);
    emit(body.str(), config.output_path);
    return kExitOk;
}

int run_certify(const std::string& kind, std::size_t k, std::size_t n, double beta,
                const std::string& out) {
    sced::RiskCertificate cert;
    if (kind == "classical") {
        cert.kind = sced::CertificateKind::Classical;
        cert.k = k;
        cert.n = n;
        cert.beta = beta;
        cert.eps_lower = 0.0;
        cert.eps_upper = sced::classical_epsilon(n, k, beta);
    } else if (kind == "solution" || kind == "compression") {
        cert = sced::certify(kind == "solution" ? sced::CertificateKind::Solution
                                                : sced::CertificateKind::Compression,
                             k, n, beta);
    } else {
        throw sced::ConfigError("certify: kind must be solution | compression | classical");
    }
    emit(sced::certificate_to_json(cert), out);
    return kExitOk;
}

int run_tune(CommonOpts& opts, const std::vector<std::size_t>& n_grid,
             double target_eps) {
    sced::RunConfig config = opts.finalize();
    const std::string out = config.output_path;
    config.output_path.clear();
    const sced::TuneResult result = sced::tune(config, n_grid, target_eps);
    emit(sced::tune_to_json(result), out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenario-compressed chance-constrained SCED toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI-style config file");

    CommonOpts solve_opts;
    CLI::App* solve_cmd =
        app.add_subcommand("solve", "run the dispatch + certification pipeline");
    solve_opts.attach(solve_cmd);

    CommonOpts compress_opts;
    CLI::App* compress_cmd =
        app.add_subcommand("compress", "compress scenarios and certify the set");
    compress_opts.attach(compress_cmd);

    CLI::App* certify_cmd =
        app.add_subcommand("certify", "risk interval from (kind, k, N, beta)");
    std::string certify_kind = "solution";
    std::size_t certify_k = 0, certify_n = 500;
    double certify_beta = 1e-3;
    std::string certify_out;
    certify_cmd->add_option("--kind", certify_kind, "solution | compression | classical");
    certify_cmd->add_option("--k", certify_k, "complexity")->required();
    certify_cmd->add_option("-n,--n", certify_n, "scenario count");
    certify_cmd->add_option("--beta", certify_beta, "confidence parameter");
    certify_cmd->add_option("-o,--out", certify_out, "output path");

    CommonOpts tune_opts;
    CLI::App* tune_cmd =
        app.add_subcommand("tune", "grow N until the certified risk meets a target");
    tune_opts.attach(tune_cmd);
    std::vector<std::size_t> n_grid;
    double target_eps = 0.05;
    tune_cmd->add_option("--n-grid", n_grid, "ascending N values")
        ->required()
        ->delimiter(',');
    tune_cmd->add_option("--target-eps", target_eps, "target upper risk bound")
        ->required();

    CLI::App* table_cmd =
        app.add_subcommand("bounds-table", "CSV of (k, eps bounds, classical eps)");
    std::size_t table_n = 500, table_kmax = 50;
    double table_beta = 1e-3;
    std::string table_out = "bounds.csv";
    table_cmd->add_option("-n,--n", table_n, "scenario count");
    table_cmd->add_option("--beta", table_beta, "confidence parameter");
    table_cmd->add_option("--k-max", table_kmax, "largest complexity row");
    table_cmd->add_option("-o,--out", table_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_opts);
        if (compress_cmd->parsed()) return run_compress(compress_opts);
        if (certify_cmd->parsed())
            return run_certify(certify_kind, certify_k, certify_n, certify_beta,
                               certify_out);
        if (tune_cmd->parsed()) return run_tune(tune_opts, n_grid, target_eps);
        if (table_cmd->parsed()) {
            sced::bounds_table(table_n, table_beta, table_kmax, table_out);
            return kExitOk;
        }
    } catch (const sced::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sced::TargetUnreachable& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sced::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sced::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sced::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sced::DimensionMismatch& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sced::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sced::DisconnectedNetwork& e) {
        std::cerr << "case error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sced::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
