#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sced/pipeline.hpp"
#include "sced/risk.hpp"

using namespace sced;

namespace {

const std::string kDataDir = SCED_DATA_DIR;

RunConfig desk_config(Method m, std::uint64_t seed = 21) {
    RunConfig c;
    c.case_path = kDataDir + "/desk6.case";
    c.n = 60;
    c.seed = seed;
    c.method = m;
    c.beta = 1e-3;
    c.holdout = 2000;
    c.repetitions = 1;
    return c;
}

nlohmann::json strip_timings(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    j.erase("timings");
    return j;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("config validation") {
    RunConfig c = desk_config(Method::None);
    c.beta = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = desk_config(Method::None);
    c.n = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = desk_config(Method::None);
    c.repetitions = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(method_from_string("hull-dual") == Method::HullDual);
    CHECK_THROWS_AS(method_from_string("fancy"), ConfigError);
}

TEST_CASE("uncompressed and hull runs produce matching costs") {
    const RunReport none = run(desk_config(Method::None));
    const RunReport hull = run(desk_config(Method::Hull));
    REQUIRE(none.repetitions.size() == 1);
    REQUIRE(hull.repetitions.size() == 1);
    REQUIRE(none.repetitions[0].status == LPStatus::Optimal);
    REQUIRE(hull.repetitions[0].status == LPStatus::Optimal);

    CHECK(none.repetitions[0].cost ==
          doctest::Approx(hull.repetitions[0].cost).epsilon(1e-7));
    CHECK(none.deterministic_cost <= none.repetitions[0].cost + 1e-6);

    // hull run compresses the scenario multiplicity
    CHECK(hull.repetitions[0].scenario_multiplicity <
          none.repetitions[0].scenario_multiplicity);
    CHECK(hull.repetitions[0].total_rows < none.repetitions[0].total_rows);

    // row-count bookkeeping matches the builder layout
    const auto& r = none.repetitions[0];
    CHECK(r.total_rows == 2 + r.scenario_multiplicity * r.rows_per_scenario);

    // both carry solution complexity and certificates
    CHECK(none.repetitions[0].solution_complexity.has_value());
    CHECK(hull.repetitions[0].solution_complexity.has_value());
    CHECK(*none.repetitions[0].solution_complexity ==
          *hull.repetitions[0].solution_complexity);
    CHECK(none.repetitions[0].solution_certificate.has_value());
    CHECK(hull.repetitions[0].compression_certificate.has_value());
}

TEST_CASE("box run is conservative and skips solution complexity") {
    const RunReport hull = run(desk_config(Method::Box));
    REQUIRE(hull.repetitions[0].status == LPStatus::Optimal);
    CHECK_FALSE(hull.repetitions[0].solution_complexity.has_value());
    CHECK(hull.repetitions[0].compression_complexity.has_value());
    CHECK(*hull.repetitions[0].compression_complexity <= 4);  // 2m with m=2
    CHECK(hull.repetitions[0].compression_certificate.has_value());
    CHECK(hull.repetitions[0].empirical_compression_risk.has_value());

    const RunReport none = run(desk_config(Method::None));
    CHECK(hull.repetitions[0].cost >= none.repetitions[0].cost - 1e-6);
}

TEST_CASE("hull-dual run matches the hull cost") {
    const RunReport dual = run(desk_config(Method::HullDual));
    const RunReport hull = run(desk_config(Method::Hull));
    REQUIRE(dual.repetitions[0].status == LPStatus::Optimal);
    CHECK(dual.repetitions[0].cost ==
          doctest::Approx(hull.repetitions[0].cost).epsilon(1e-6));
    CHECK_FALSE(dual.repetitions[0].solution_complexity.has_value());
}

TEST_CASE("reports are byte-identical modulo the timings subtree") {
    RunConfig c = desk_config(Method::Hull, 99);
    c.repetitions = 2;
    const RunReport a = run(c);
    const RunReport b = run(c);
    CHECK(strip_timings(report_to_json(a)) == strip_timings(report_to_json(b)));
}

TEST_CASE("certificates in the report revalidate from their fields") {
    RunConfig c = desk_config(Method::Hull, 5);
    c.repetitions = 2;
    const RunReport rep = run(c);
    for (const auto& r : rep.repetitions) {
        if (r.solution_certificate) {
            const auto again =
                certify(CertificateKind::Solution, r.solution_certificate->k,
                        r.solution_certificate->n, r.solution_certificate->beta);
            CHECK(again.eps_lower == r.solution_certificate->eps_lower);
            CHECK(again.eps_upper == r.solution_certificate->eps_upper);
        }
        if (r.compression_certificate) {
            const auto again = certify(CertificateKind::Compression,
                                       r.compression_certificate->k,
                                       r.compression_certificate->n,
                                       r.compression_certificate->beta);
            CHECK(again.eps_upper == r.compression_certificate->eps_upper);
        }
    }
    CHECK(rep.mean_solution_complexity.has_value());
}

TEST_CASE("tune walks the grid and honors trivial targets") {
    RunConfig c = desk_config(Method::Box, 3);
    c.holdout = 500;
    const TuneResult quick = tune(c, {20, 40}, 1.0);
    CHECK(quick.chosen_n == 20);
    CHECK(quick.reports.size() == 1);

    const TuneResult strict = tune(c, {20, 40, 200}, 0.12);
    CHECK(strict.chosen_n >= quick.chosen_n);
    CHECK(strict.achieved_eps_upper <= 0.12);
    CHECK(strict.cumulative_rows_uncompressed.back() >
          strict.cumulative_rows_compressed.back());

    CHECK_THROWS_AS(tune(c, {20, 40}, 1e-6), TargetUnreachable);
    CHECK_THROWS_AS(tune(c, {40, 20}, 0.5), ConfigError);
}

TEST_CASE("bounds table emits monotone columns") {
    const std::string path = "sced_test_bounds.csv";
    bounds_table(500, 1e-3, 10, path);
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "k,eps_lower,eps_upper,classical_eps");
    double prev_lo = -1, prev_hi = -1, prev_cl = -1;
    std::string line;
    int rows = 0;
    while (std::getline(f, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int k;
        double lo, hi;
        ss >> k >> lo >> hi;
        double cl = -1;
        ss >> cl;
        if (k == 0) CHECK(lo == 0.0);
        if (k == 6) CHECK(std::abs(hi - 0.045) <= 0.001);
        CHECK(lo >= prev_lo - 1e-12);
        CHECK(hi >= prev_hi - 1e-12);
        if (k >= 2) CHECK(cl >= prev_cl - 1e-12);
        prev_lo = lo;
        prev_hi = hi;
        if (k >= 1) prev_cl = cl;
        ++rows;
    }
    CHECK(rows == 11);
    std::remove(path.c_str());
}

#ifdef SCED_CLI_PATH
TEST_CASE("command line exit codes") {
    const std::string cli = SCED_CLI_PATH;
    const std::string data = kDataDir;
    auto run_cli = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > sced_cli_out.txt 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run_cli("certify --kind compression --k 6 -n 500 --beta 0.001") == 0);
    CHECK(run_cli("solve --case " + data +
                  "/toy3.case -n 20 --holdout 50 --method hull --seed 3 "
                  "--no-complexity -o sced_cli_report.json") == 0);
    CHECK(run_cli("solve --case " + data + "/toy3.case --beta 7") == 2);
    CHECK(run_cli("solve --case /nonexistent.case") == 3);
    CHECK(run_cli("certify --kind warp --k 2") == 2);
    CHECK(run_cli("bounds-table -n 50 --k-max 60 -o x.csv") == 2);
    std::remove("sced_cli_out.txt");
    std::remove("sced_cli_report.json");
}
#endif

TEST_SUITE_END();
