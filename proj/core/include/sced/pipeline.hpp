#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sced/dispatch.hpp"
#include "sced/grid.hpp"
#include "sced/risk.hpp"

namespace sced {

enum class Method { None, Hull, Box, HullDual };

const char* to_string(Method m);
Method method_from_string(const std::string& s);  // throws ConfigError

/// One end-to-end certification run: case + scenario source + compression
/// method + confidence parameters.
struct RunConfig {
    std::string case_path;
    std::string scenario_csv;     // empty: Gaussian factors from case regions
    std::string csv_space = "auto";  // auto | factors | farms
    std::size_t n = 500;
    std::uint64_t seed = 1;
    Method method = Method::None;
    double beta = 1e-3;
    /// 0 keeps every line on networks up to 200 lines and applies the 0.6
    /// loading threshold above that; any value in (0,1] forces the threshold.
    double key_line_threshold = 0.0;
    std::size_t holdout = 10000;
    std::size_t repetitions = 1;
    std::string output_path;
    bool compute_complexity = true;
    bool eta_nonnegative = false;

    void validate() const;  // throws ConfigError
};

struct RepetitionRecord {
    std::uint64_t seed = 0;
    LPStatus status = LPStatus::Infeasible;
    double cost = 0.0;
    std::optional<std::size_t> solution_complexity;
    bool degenerate_warning = false;
    std::optional<std::size_t> compression_complexity;
    std::optional<RiskCertificate> solution_certificate;
    std::optional<RiskCertificate> compression_certificate;
    std::optional<double> empirical_solution_risk;
    std::optional<double> empirical_compression_risk;
    std::size_t rows_per_scenario = 0;
    std::size_t scenario_multiplicity = 0;  // N, or v after hull compression
    std::size_t total_rows = 0;
    std::size_t total_vars = 0;
    double build_seconds = 0.0;  // reported under the timings subtree only
    double solve_seconds = 0.0;
};

struct RunReport {
    std::string schema_version = "sced-report/1";
    RunConfig config;
    std::string case_name;
    std::size_t key_line_count = 0;
    double deterministic_cost = 0.0;
    std::vector<RepetitionRecord> repetitions;

    double mean_cost = 0.0;
    std::optional<double> mean_solution_complexity;  // fractional in aggregate
    std::optional<double> mean_compression_complexity;
    std::optional<double> mean_empirical_solution_risk;
    std::optional<double> mean_empirical_compression_risk;
};

/// Execute the configured pipeline: parse, sample/load, compress, build,
/// solve, certify, validate on holdout; one record per repetition.
RunReport run(const RunConfig& config);

struct TuneResult {
    std::vector<RunReport> reports;     // one per grid point tried
    std::size_t chosen_n = 0;
    double achieved_eps_upper = 0.0;
    /// Portable effort proxy: cumulative constraint-row counts across the
    /// grid, for the compressed run and for an uncompressed run of the same N.
    std::vector<std::size_t> cumulative_rows_compressed;
    std::vector<std::size_t> cumulative_rows_uncompressed;
};

/// Re-run the pipeline over ascending sample sizes until the certificate's
/// upper risk bound reaches the target. Throws TargetUnreachable.
TuneResult tune(const RunConfig& config, const std::vector<std::size_t>& n_grid,
                double target_eps);

/// CSV of (k, eps_lower, eps_upper, classical eps) for k = 0..k_max.
void bounds_table(std::size_t n, double beta, std::size_t k_max,
                  const std::filesystem::path& out);

/// Deterministic JSON serialization; wall-clock times are isolated in a
/// "timings" subtree so reports are byte-identical across runs otherwise.
std::string report_to_json(const RunReport& report);
void write_report_json(const RunReport& report, const std::filesystem::path& out);

std::string tune_to_json(const TuneResult& result);

/// JSON shapes for the compressed sets (the `compress` subcommand output).
std::string polytope_to_json(const Polytope& p);
std::string box_to_json(const Box& b);
std::string certificate_to_json(const RiskCertificate& c);

}  // namespace sced
