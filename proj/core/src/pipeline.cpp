#include "sced/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sced {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Method m) {
    switch (m) {
        case Method::None:
            return "none";
        case Method::Hull:
            return "hull";
        case Method::Box:
            return "box";
        case Method::HullDual:
            return "hull-dual";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "none") return Method::None;
    if (s == "hull") return Method::Hull;
    if (s == "box") return Method::Box;
    if (s == "hull-dual") return Method::HullDual;
    throw ConfigError("unknown method '" + s + "' (none | hull | box | hull-dual)");
}

void RunConfig::validate() const {
    if (case_path.empty()) throw ConfigError("config: case path is required");
    if (n < 1) throw ConfigError("config: N must be >= 1");
    if (!(beta > 0.0) || !(beta < 1.0))
        throw ConfigError("config: beta must be in (0,1)");
    if (repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    if (key_line_threshold < 0.0 || key_line_threshold > 1.0)
        throw ConfigError("config: key-line threshold must be in (0,1] or 0 for auto");
    if (csv_space != "auto" && csv_space != "factors" && csv_space != "farms")
        throw ConfigError("config: csv-space must be auto | factors | farms");
    if (holdout < 1) throw ConfigError("config: holdout must be >= 1");
}

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

struct CaseBundle {
    GridCase grid;
    PtdfPartition ptdf;
    AffineMap map;          // regional factors -> farm MW errors
    Vec region_sigmas;
    std::vector<std::size_t> key_lines;
    DispatchSolution det;
};

CaseBundle prepare_case(const RunConfig& config) {
    CaseBundle cb;
    cb.grid = parse_case(config.case_path);
    if (cb.grid.num_wind() == 0)
        throw ConfigError("config: case has no wind farms to draw scenarios for");
    cb.ptdf = compute_ptdf(cb.grid);

    std::vector<std::size_t> farm_region(cb.grid.num_wind());
    for (std::size_t f = 0; f < cb.grid.num_wind(); ++f)
        farm_region[f] = cb.grid.region_index(cb.grid.wind_farms[f].region);
    cb.map = make_regional_map(cb.grid.wind_forecast_vector(), farm_region,
                               cb.grid.num_regions());
    cb.region_sigmas.resize(cb.grid.num_regions());
    for (std::size_t q = 0; q < cb.grid.num_regions(); ++q)
        cb.region_sigmas[q] = cb.grid.regions[q].sigma;

    cb.det = solve_dispatch(build_deterministic(cb.grid, cb.ptdf), cb.grid, cb.ptdf);
    if (cb.det.status != LPStatus::Optimal)
        throw ValidationError("pipeline: deterministic dispatch is " +
                              std::string(to_string(cb.det.status)));

    double threshold = config.key_line_threshold;
    if (threshold == 0.0 && cb.grid.num_lines() > 200) threshold = 0.6;
    cb.key_lines = (threshold == 0.0) ? all_lines(cb.grid)
                                      : select_key_lines(cb.grid, cb.det, threshold);
    return cb;
}

struct ScenarioDraw {
    ScenarioSet factors;       // regional factor space
    ScenarioSet farms;         // farm-space MW errors (index aligned)
    ScenarioSet holdout_factors;
    ScenarioSet holdout_farms;
};

ScenarioDraw draw_scenarios(const RunConfig& config, const CaseBundle& cb,
                            std::uint64_t rep_seed) {
    ScenarioDraw d;
    if (config.scenario_csv.empty()) {
        d.factors = sample_gaussian_regions(cb.region_sigmas, config.n, rep_seed);
        d.holdout_factors = sample_gaussian_regions(
            cb.region_sigmas, config.holdout, SplitMix64::derive(rep_seed, 7));
    } else {
        const std::size_t m = cb.grid.num_regions();
        const std::size_t n_w = cb.grid.num_wind();
        bool factor_space;
        if (config.csv_space == "factors")
            factor_space = true;
        else if (config.csv_space == "farms")
            factor_space = false;
        else {
            // auto: disambiguate by column count
            if (m == n_w)
                throw ConfigError(
                    "config: csv-space=auto is ambiguous when the region and farm "
                    "counts match; pass factors or farms");
            factor_space = true;
            try {
                (void)load_scenarios_csv(config.scenario_csv, m);
            } catch (const DimensionMismatch&) {
                factor_space = false;
            }
        }
        ScenarioSet all =
            load_scenarios_csv(config.scenario_csv, factor_space ? m : n_w);
        if (all.size() <= config.n)
            throw ConfigError(
                "config: scenario file must hold more than N rows so a holdout "
                "remains");
        auto [train, hold] = split_holdout(all, config.n, rep_seed);
        if (factor_space) {
            d.factors = std::move(train);
            d.holdout_factors = std::move(hold);
        } else {
            d.farms = std::move(train);
            d.holdout_farms = std::move(hold);
        }
    }
    if (d.farms.size() == 0 && d.factors.size() > 0) {
        d.farms = project_to_farms(d.factors, cb.map);
        d.holdout_farms = project_to_farms(d.holdout_factors, cb.map);
    }
    return d;
}

void apply_eta_sign_option(LPProblem& p, const RunConfig& config, std::size_t n_g) {
    if (!config.eta_nonnegative || p.num_vars < 2 * n_g) return;
    for (std::size_t u = 0; u < n_g; ++u) p.lower[n_g + u] = 0.0;
}

RepetitionRecord run_repetition(const RunConfig& config, const CaseBundle& cb,
                                std::uint64_t rep_seed) {
    RepetitionRecord rec;
    rec.seed = rep_seed;
    const std::size_t n_g = cb.grid.num_generators();
    rec.rows_per_scenario = 2 * cb.key_lines.size() + 4 * n_g;

    const ScenarioDraw draw = draw_scenarios(config, cb, rep_seed);
    const bool have_factors = draw.factors.size() > 0;

    Timer build_timer;
    LPProblem program;
    std::optional<Polytope> hull;
    std::optional<Box> box;

    switch (config.method) {
        case Method::None:
            program = build_scenario_program(cb.grid, cb.ptdf, draw.farms,
                                             cb.key_lines);
            rec.scenario_multiplicity = draw.farms.size();
            break;
        case Method::Hull: {
            if (!have_factors)
                throw ConfigError(
                    "config: hull compression over farm-space CSV scenarios needs "
                    "factor-space data (the farm cloud is degenerate)");
            hull = convex_hull(draw.factors);
            program = build_vertex_program(cb.grid, cb.ptdf, *hull, draw.farms,
                                           cb.key_lines);
            rec.scenario_multiplicity = hull->num_vertices();
            rec.compression_complexity = hull->num_vertices();
            break;
        }
        case Method::Box: {
            const ScenarioSet& base = have_factors ? draw.factors : draw.farms;
            const AffineMap map =
                have_factors ? cb.map : AffineMap::identity(cb.grid.num_wind());
            box = box_hull(base);
            auto [p, rc] = build_box_counterpart(cb.grid, cb.ptdf, *box, map,
                                                 cb.key_lines);
            program = std::move(p);
            rec.scenario_multiplicity = 0;
            rec.compression_complexity = box->touching.size();
            break;
        }
        case Method::HullDual: {
            if (!have_factors)
                throw ConfigError(
                    "config: hull-dual needs factor-space scenarios for a "
                    "full-dimensional hull");
            hull = convex_hull(draw.factors);
            auto [p, rc] = build_hull_dual_counterpart(cb.grid, cb.ptdf, *hull,
                                                       cb.map, cb.key_lines);
            program = std::move(p);
            rec.scenario_multiplicity = 0;
            rec.compression_complexity = hull->num_vertices();
            break;
        }
    }
    apply_eta_sign_option(program, config, n_g);
    rec.total_rows = program.num_rows();
    rec.total_vars = program.num_vars;
    rec.build_seconds = build_timer.seconds();

    Timer solve_timer;
    DispatchSolution sol = solve_dispatch(program, cb.grid, cb.ptdf);
    rec.solve_seconds = solve_timer.seconds();
    rec.status = sol.status;
    if (sol.status != LPStatus::Optimal) return rec;
    rec.cost = sol.cost;

    // complexity + solution certificate for the scenario-row methods
    if (config.compute_complexity &&
        (config.method == Method::None || config.method == Method::Hull)) {
        const std::vector<std::size_t> warm = sol.working_rows;
        const LPProblem& prog = program;
        GroupResolver resolver = [&prog, &warm](const std::vector<int>& excluded) {
            return solve_rows_lazily(prog, excluded, warm).solution;
        };
        const ComplexityReport crep = solution_complexity(program, sol.lp, resolver);
        rec.solution_complexity = crep.complexity;
        rec.degenerate_warning = crep.degenerate_warning;
        rec.solution_certificate =
            certify(CertificateKind::Solution, crep.complexity, config.n, config.beta);
    }
    if (rec.compression_complexity) {
        rec.compression_certificate =
            certify(CertificateKind::Compression, *rec.compression_complexity,
                    config.n, config.beta);
    }

    // holdout validation
    if (config.method == Method::None || config.method == Method::Hull) {
        rec.empirical_solution_risk = estimate_solution_risk(
            sol, cb.grid, cb.ptdf, draw.holdout_farms, cb.key_lines);
    }
    if (hull) {
        rec.empirical_compression_risk =
            estimate_compression_risk(*hull, draw.holdout_factors);
    } else if (box) {
        rec.empirical_compression_risk = estimate_compression_risk(
            *box, draw.factors.size() > 0 ? draw.holdout_factors : draw.holdout_farms);
    }
    return rec;
}

}  // namespace

RunReport run(const RunConfig& config) {
    config.validate();
    const CaseBundle cb = prepare_case(config);

    RunReport report;
    report.config = config;
    report.case_name = cb.grid.name;
    report.key_line_count = cb.key_lines.size();
    report.deterministic_cost = cb.det.cost;

    for (std::size_t r = 0; r < config.repetitions; ++r) {
        const std::uint64_t rep_seed =
            config.repetitions == 1 ? config.seed : SplitMix64::derive(config.seed, r);
        report.repetitions.push_back(run_repetition(config, cb, rep_seed));
    }

    // aggregates over optimal repetitions
    double cost_sum = 0.0, s_sum = 0.0, kc_sum = 0.0, esr_sum = 0.0, ecr_sum = 0.0;
    std::size_t n_ok = 0, n_s = 0, n_kc = 0, n_esr = 0, n_ecr = 0;
    for (const auto& rec : report.repetitions) {
        if (rec.status != LPStatus::Optimal) continue;
        cost_sum += rec.cost;
        ++n_ok;
        if (rec.solution_complexity) {
            s_sum += double(*rec.solution_complexity);
            ++n_s;
        }
        if (rec.compression_complexity) {
            kc_sum += double(*rec.compression_complexity);
            ++n_kc;
        }
        if (rec.empirical_solution_risk) {
            esr_sum += *rec.empirical_solution_risk;
            ++n_esr;
        }
        if (rec.empirical_compression_risk) {
            ecr_sum += *rec.empirical_compression_risk;
            ++n_ecr;
        }
    }
    if (n_ok) report.mean_cost = cost_sum / double(n_ok);
    if (n_s) report.mean_solution_complexity = s_sum / double(n_s);
    if (n_kc) report.mean_compression_complexity = kc_sum / double(n_kc);
    if (n_esr) report.mean_empirical_solution_risk = esr_sum / double(n_esr);
    if (n_ecr) report.mean_empirical_compression_risk = ecr_sum / double(n_ecr);

    if (!config.output_path.empty()) write_report_json(report, config.output_path);
    return report;
}

TuneResult tune(const RunConfig& config, const std::vector<std::size_t>& n_grid,
                double target_eps) {
    if (n_grid.empty()) throw ConfigError("tune: empty N grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw ConfigError("tune: N grid must be strictly ascending");

    TuneResult result;
    std::size_t cum_comp = 0, cum_uncomp = 0;
    for (std::size_t n : n_grid) {
        RunConfig step = config;
        step.n = n;
        step.output_path.clear();
        RunReport rep = run(step);
        // certificate watched for the stopping rule: solution bound when
        // available, compression bound otherwise
        double worst_upper = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : rep.repetitions) {
            const std::optional<RiskCertificate>& cert =
                (config.method == Method::None || config.method == Method::Hull)
                    ? r.solution_certificate
                    : r.compression_certificate;
            if (!cert) continue;
            if (std::isnan(worst_upper) || cert->eps_upper > worst_upper)
                worst_upper = cert->eps_upper;
        }
        std::size_t rows_comp = 0, rows_uncomp = 0;
        for (const auto& r : rep.repetitions) {
            rows_comp += r.total_rows;
            rows_uncomp += 2 + r.rows_per_scenario * n;
        }
        cum_comp += rows_comp;
        cum_uncomp += rows_uncomp;
        result.cumulative_rows_compressed.push_back(cum_comp);
        result.cumulative_rows_uncompressed.push_back(cum_uncomp);
        result.reports.push_back(std::move(rep));

        if (!std::isnan(worst_upper) && worst_upper <= target_eps) {
            result.chosen_n = n;
            result.achieved_eps_upper = worst_upper;
            return result;
        }
    }
    throw TargetUnreachable("tune: target risk " + std::to_string(target_eps) +
                            " not reached at the largest N in the grid");
}

void bounds_table(std::size_t n, double beta, std::size_t k_max,
                  const std::filesystem::path& out) {
    if (k_max > n) throw DomainError("bounds_table: k_max must be <= N");
    std::ofstream f(out);
    if (!f) throw IoError("bounds_table: cannot write " + out.string());
    f << "k,eps_lower,eps_upper,classical_eps\n";
    char buf[128];
    for (std::size_t k = 0; k <= k_max; ++k) {
        const auto [lo, hi] = epsilon_bounds(k, n, beta);
        if (k >= 1) {
            const double ce = classical_epsilon(n, k, beta);
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g\n", k, lo, hi, ce);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,\n", k, lo, hi);
        }
        f << buf;
    }
    if (!f.good()) throw IoError("bounds_table: write failed for " + out.string());
}

namespace {

ordered_json certificate_json(const RiskCertificate& c) {
    ordered_json j;
    j["kind"] = to_string(c.kind);
    j["k"] = c.k;
    j["n"] = c.n;
    j["beta"] = c.beta;
    j["eps_lower"] = c.eps_lower;
    j["eps_upper"] = c.eps_upper;
    return j;
}

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["case"] = c.case_path;
    j["scenario_csv"] = c.scenario_csv;
    j["csv_space"] = c.csv_space;
    j["n"] = c.n;
    j["seed"] = c.seed;
    j["method"] = to_string(c.method);
    j["beta"] = c.beta;
    j["key_line_threshold"] = c.key_line_threshold;
    j["holdout"] = c.holdout;
    j["repetitions"] = c.repetitions;
    j["compute_complexity"] = c.compute_complexity;
    j["eta_nonnegative"] = c.eta_nonnegative;
    return j;
}

ordered_json report_json(const RunReport& report) {
    ordered_json j;
    j["schema"] = report.schema_version;
    j["config"] = config_json(report.config);
    j["case_name"] = report.case_name;
    j["key_line_count"] = report.key_line_count;
    j["deterministic_cost"] = report.deterministic_cost;

    ordered_json reps = ordered_json::array();
    ordered_json timings = ordered_json::array();
    for (const auto& r : report.repetitions) {
        ordered_json rj;
        rj["seed"] = r.seed;
        rj["status"] = to_string(r.status);
        rj["cost"] = r.cost;
        rj["solution_complexity"] =
            r.solution_complexity ? ordered_json(*r.solution_complexity)
                                  : ordered_json(nullptr);
        rj["degenerate_warning"] = r.degenerate_warning;
        rj["compression_complexity"] =
            r.compression_complexity ? ordered_json(*r.compression_complexity)
                                     : ordered_json(nullptr);
        rj["solution_certificate"] = r.solution_certificate
                                         ? certificate_json(*r.solution_certificate)
                                         : ordered_json(nullptr);
        rj["compression_certificate"] =
            r.compression_certificate ? certificate_json(*r.compression_certificate)
                                      : ordered_json(nullptr);
        rj["empirical_solution_risk"] = r.empirical_solution_risk
                                            ? ordered_json(*r.empirical_solution_risk)
                                            : ordered_json(nullptr);
        rj["empirical_compression_risk"] =
            r.empirical_compression_risk ? ordered_json(*r.empirical_compression_risk)
                                         : ordered_json(nullptr);
        rj["rows_per_scenario"] = r.rows_per_scenario;
        rj["scenario_multiplicity"] = r.scenario_multiplicity;
        rj["total_rows"] = r.total_rows;
        rj["total_vars"] = r.total_vars;
        reps.push_back(std::move(rj));

        ordered_json tj;
        tj["build_seconds"] = r.build_seconds;
        tj["solve_seconds"] = r.solve_seconds;
        timings.push_back(std::move(tj));
    }
    j["repetitions"] = std::move(reps);

    ordered_json agg;
    agg["mean_cost"] = report.mean_cost;
    agg["mean_solution_complexity"] =
        report.mean_solution_complexity ? ordered_json(*report.mean_solution_complexity)
                                        : ordered_json(nullptr);
    agg["mean_compression_complexity"] =
        report.mean_compression_complexity
            ? ordered_json(*report.mean_compression_complexity)
            : ordered_json(nullptr);
    agg["mean_empirical_solution_risk"] =
        report.mean_empirical_solution_risk
            ? ordered_json(*report.mean_empirical_solution_risk)
            : ordered_json(nullptr);
    agg["mean_empirical_compression_risk"] =
        report.mean_empirical_compression_risk
            ? ordered_json(*report.mean_empirical_compression_risk)
            : ordered_json(nullptr);
    j["aggregate"] = std::move(agg);

    // wall-clock isolated last so determinism checks can strip it
    j["timings"] = std::move(timings);
    return j;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
    return report_json(report).dump(2) + "\n";
}

void write_report_json(const RunReport& report, const std::filesystem::path& out) {
    std::ofstream f(out);
    if (!f) throw IoError("write_report_json: cannot write " + out.string());
    f << report_to_json(report);
    if (!f.good()) throw IoError("write_report_json: write failed");
}

std::string tune_to_json(const TuneResult& result) {
    ordered_json j;
    j["chosen_n"] = result.chosen_n;
    j["achieved_eps_upper"] = result.achieved_eps_upper;
    ordered_json steps = ordered_json::array();
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        ordered_json s;
        s["n"] = result.reports[i].config.n;
        s["report"] = report_json(result.reports[i]);
        s["cumulative_rows_compressed"] = result.cumulative_rows_compressed[i];
        s["cumulative_rows_uncompressed"] = result.cumulative_rows_uncompressed[i];
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j.dump(2) + "\n";
}

std::string polytope_to_json(const Polytope& p) {
    ordered_json j;
    j["kind"] = "polytope";
    j["dim"] = p.dim;
    j["vertices"] = p.vertices;
    j["vertex_indices"] = p.vertex_indices;
    ordered_json hs = ordered_json::array();
    for (std::size_t h = 0; h < p.num_halfspaces(); ++h) {
        ordered_json row;
        Vec normal(p.halfspace_normals.row(h).begin(), p.halfspace_normals.row(h).end());
        row["normal"] = normal;
        row["offset"] = p.halfspace_offsets[h];
        hs.push_back(std::move(row));
    }
    j["halfspaces"] = std::move(hs);
    return j.dump(2) + "\n";
}

std::string box_to_json(const Box& b) {
    ordered_json j;
    j["kind"] = "box";
    j["dim"] = b.dim;
    j["lower"] = b.lower;
    j["upper"] = b.upper;
    j["touching"] = b.touching;
    return j.dump(2) + "\n";
}

std::string certificate_to_json(const RiskCertificate& c) {
    return certificate_json(c).dump(2) + "\n";
}

}  // namespace sced
