#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sced/numerics.hpp"

namespace sced {

struct Bus {
    int id = 0;
    bool is_slack = false;
};

/// Transmission line with symmetric rating: the lower flow limit is -capacity.
struct Line {
    int from_bus = 0;
    int to_bus = 0;
    double reactance_pu = 0.0;
    double capacity_mw = 0.0;
};

struct Generator {
    int bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double ramp_down_mw = 0.0;  // <= 0
    double ramp_up_mw = 0.0;    // >= 0
    double cost_per_mwh = 0.0;
};

struct Load {
    int bus = 0;
    double mw = 0.0;
};

struct Region {
    int id = 0;
    double sigma = 0.0;  // relative forecast-error standard deviation
};

struct WindFarm {
    int bus = 0;
    double forecast_mw = 0.0;
    double capacity_mw = 0.0;
    int region = 0;
};

/// Immutable dispatch case: buses, lines, generators, loads, wind farms and
/// forecast regions. Built by parse_case or assembled directly and then
/// validated.
struct GridCase {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    std::vector<WindFarm> wind_farms;
    std::vector<Region> regions;

    std::size_t num_buses() const { return buses.size(); }
    std::size_t num_lines() const { return lines.size(); }
    std::size_t num_generators() const { return generators.size(); }
    std::size_t num_wind() const { return wind_farms.size(); }
    std::size_t num_regions() const { return regions.size(); }

    std::size_t slack_index() const;
    /// Position of a bus id in `buses`; throws ValidationError when absent.
    std::size_t bus_index(int bus_id) const;
    /// Position of a region id in `regions`; throws ValidationError when absent.
    std::size_t region_index(int region_id) const;

    Vec load_vector() const;           // one entry per load row
    Vec wind_forecast_vector() const;  // \hat{w}, one entry per farm
    Vec generator_cost_vector() const;
    double total_load() const;
    double total_wind_forecast() const;

    /// Enforce every case invariant; throws ValidationError naming the
    /// violated one.
    void validate() const;
};

/// PTDF matrix H split by injection type: columns of H restricted to
/// generator, load and wind buses. Rows are lines; the slack column of the
/// underlying bus-level H is identically zero.
struct PtdfPartition {
    DenseMatrix h_gen;   // n_f x n_g
    DenseMatrix h_load;  // n_f x n_d
    DenseMatrix h_wind;  // n_f x n_w

    std::size_t num_lines() const { return h_gen.rows; }
};

/// Parse the structured-text case format (docs/case-format.md). Throws
/// ParseError with a line reference or ValidationError from validate().
GridCase parse_case(const std::filesystem::path& path);
GridCase parse_case_text(const std::string& text, const std::string& origin = "<memory>");

/// DC PTDF from the slack-reduced nodal susceptance matrix. Throws
/// DisconnectedNetwork when the reduced matrix is singular.
PtdfPartition compute_ptdf(const GridCase& grid);

/// Line flows H_g g - H_d d + H_w w for a realized wind injection w.
Vec line_flows(const PtdfPartition& ptdf, const Vec& gen_mw, const Vec& load_mw,
               const Vec& wind_mw);

}  // namespace sced
