#include "sced/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace sced {

std::size_t GridCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].is_slack) return i;
    throw ValidationError("slack: no slack bus declared");
}

std::size_t GridCase::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return i;
    throw ValidationError("bus: unknown bus id " + std::to_string(bus_id));
}

std::size_t GridCase::region_index(int region_id) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i].id == region_id) return i;
    throw ValidationError("region: unknown region id " + std::to_string(region_id));
}

Vec GridCase::load_vector() const {
    Vec d(loads.size());
    for (std::size_t i = 0; i < loads.size(); ++i) d[i] = loads[i].mw;
    return d;
}

Vec GridCase::wind_forecast_vector() const {
    Vec w(wind_farms.size());
    for (std::size_t i = 0; i < wind_farms.size(); ++i) w[i] = wind_farms[i].forecast_mw;
    return w;
}

Vec GridCase::generator_cost_vector() const {
    Vec c(generators.size());
    for (std::size_t i = 0; i < generators.size(); ++i) c[i] = generators[i].cost_per_mwh;
    return c;
}

double GridCase::total_load() const {
    double s = 0.0;
    for (const auto& l : loads) s += l.mw;
    return s;
}

double GridCase::total_wind_forecast() const {
    double s = 0.0;
    for (const auto& w : wind_farms) s += w.forecast_mw;
    return s;
}

void GridCase::validate() const {
    if (buses.empty()) throw ValidationError("buses: case has no buses");

    int slack_count = 0;
    std::map<int, int> seen_bus;
    for (const auto& b : buses) {
        if (b.is_slack) ++slack_count;
        if (++seen_bus[b.id] > 1)
            throw ValidationError("bus: duplicate bus id " + std::to_string(b.id));
    }
    if (slack_count != 1)
        throw ValidationError("slack: expected exactly one slack bus, found " +
                              std::to_string(slack_count));

    for (const auto& l : lines) {
        bus_index(l.from_bus);
        bus_index(l.to_bus);
        if (l.from_bus == l.to_bus)
            throw ValidationError("line: self-loop at bus " + std::to_string(l.from_bus));
        if (!(l.reactance_pu > 0.0))
            throw ValidationError("reactance: line " + std::to_string(l.from_bus) + "-" +
                                  std::to_string(l.to_bus) + " must have reactance > 0");
        if (!(l.capacity_mw > 0.0))
            throw ValidationError("capacity: line " + std::to_string(l.from_bus) + "-" +
                                  std::to_string(l.to_bus) + " must have capacity > 0");
    }

    double total_gmax = 0.0;
    for (const auto& g : generators) {
        bus_index(g.bus);
        if (g.p_min_mw > g.p_max_mw)
            throw ValidationError("generator: p_min > p_max at bus " +
                                  std::to_string(g.bus));
        if (g.ramp_down_mw > 0.0 || g.ramp_up_mw < 0.0)
            throw ValidationError("ramp: need ramp_down <= 0 <= ramp_up at bus " +
                                  std::to_string(g.bus));
        total_gmax += g.p_max_mw;
    }

    for (const auto& l : loads) {
        bus_index(l.bus);
        if (l.mw < 0.0)
            throw ValidationError("load: negative load at bus " + std::to_string(l.bus));
    }

    for (const auto& w : wind_farms) {
        bus_index(w.bus);
        region_index(w.region);
        if (w.forecast_mw < 0.0 || w.capacity_mw <= 0.0 || w.forecast_mw > w.capacity_mw)
            throw ValidationError("wind: forecast must lie in [0, capacity] at bus " +
                                  std::to_string(w.bus));
    }

    for (const auto& r : regions)
        if (!(r.sigma > 0.0))
            throw ValidationError("region: sigma must be > 0 for region " +
                                  std::to_string(r.id));

    if (total_gmax + 1e-9 < total_load() - total_wind_forecast())
        throw ValidationError(
            "capability: total generation capacity below net load (sum gmax < sum d - "
            "sum w)");
}

namespace {

struct ParseCursor {
    std::string origin;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
    }
};

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double to_real(const std::string& tok, const ParseCursor& cur) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        cur.fail("expected a number, got '" + tok + "'");
    }
    if (used != tok.size()) cur.fail("trailing characters in number '" + tok + "'");
    if (!std::isfinite(v)) cur.fail("non-finite number '" + tok + "'");
    return v;
}

int to_int(const std::string& tok, const ParseCursor& cur) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &used);
    } catch (const std::exception&) {
        cur.fail("expected an integer, got '" + tok + "'");
    }
    if (used != tok.size()) cur.fail("trailing characters in integer '" + tok + "'");
    return v;
}

}  // namespace

GridCase parse_case_text(const std::string& text, const std::string& origin) {
    GridCase grid;
    ParseCursor cur{origin, 0};
    std::istringstream in(text);
    std::string raw;
    std::string section;

    while (std::getline(in, raw)) {
        ++cur.line_no;
        const auto hash = raw.find('#');
        std::string line = (hash == std::string::npos) ? raw : raw.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        if (line.front() == '[') {
            if (line.back() != ']') cur.fail("malformed section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }

        if (section == "meta") {
            const auto eq = line.find('=');
            if (eq == std::string::npos) cur.fail("expected key = value in [meta]");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                return (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
            };
            if (trim(key) == "name") grid.name = trim(val);
            continue;
        }

        const auto toks = tokenize(line);
        if (section == "buses") {
            if (toks.size() != 2) cur.fail("[buses] rows need: id slack_flag");
            grid.buses.push_back({to_int(toks[0], cur), to_int(toks[1], cur) != 0});
        } else if (section == "lines") {
            if (toks.size() != 4)
                cur.fail("[lines] rows need: from to reactance_pu capacity_mw");
            grid.lines.push_back({to_int(toks[0], cur), to_int(toks[1], cur),
                                  to_real(toks[2], cur), to_real(toks[3], cur)});
        } else if (section == "generators") {
            if (toks.size() != 6)
                cur.fail(
                    "[generators] rows need: bus pmin pmax ramp_down ramp_up cost");
            grid.generators.push_back({to_int(toks[0], cur), to_real(toks[1], cur),
                                       to_real(toks[2], cur), to_real(toks[3], cur),
                                       to_real(toks[4], cur), to_real(toks[5], cur)});
        } else if (section == "loads") {
            if (toks.size() != 2) cur.fail("[loads] rows need: bus mw");
            grid.loads.push_back({to_int(toks[0], cur), to_real(toks[1], cur)});
        } else if (section == "regions") {
            if (toks.size() != 2) cur.fail("[regions] rows need: id sigma");
            grid.regions.push_back({to_int(toks[0], cur), to_real(toks[1], cur)});
        } else if (section == "wind") {
            if (toks.size() != 4)
                cur.fail("[wind] rows need: bus forecast_mw capacity_mw region");
            grid.wind_farms.push_back({to_int(toks[0], cur), to_real(toks[1], cur),
                                       to_real(toks[2], cur), to_int(toks[3], cur)});
        } else if (section.empty()) {
            cur.fail("data before any [section] header");
        } else {
            cur.fail("unknown section [" + section + "]");
        }
    }

    grid.validate();
    return grid;
}

GridCase parse_case(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError(path.string() + ": cannot open case file");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_case_text(buf.str(), path.string());
}

PtdfPartition compute_ptdf(const GridCase& grid) {
    const std::size_t nb = grid.num_buses();
    const std::size_t nf = grid.num_lines();
    const std::size_t slack = grid.slack_index();

    // Nodal susceptance matrix, then drop the slack row/column.
    DenseMatrix b_bus(nb, nb);
    for (const auto& l : grid.lines) {
        const std::size_t i = grid.bus_index(l.from_bus);
        const std::size_t j = grid.bus_index(l.to_bus);
        const double y = 1.0 / l.reactance_pu;
        b_bus(i, i) += y;
        b_bus(j, j) += y;
        b_bus(i, j) -= y;
        b_bus(j, i) -= y;
    }

    const std::size_t nr = nb - 1;
    auto reduced_index = [&](std::size_t b) { return b < slack ? b : b - 1; };
    DenseMatrix b_red(nr, nr);
    for (std::size_t i = 0; i < nb; ++i) {
        if (i == slack) continue;
        for (std::size_t j = 0; j < nb; ++j) {
            if (j == slack) continue;
            b_red(reduced_index(i), reduced_index(j)) = b_bus(i, j);
        }
    }

    LUFactorization lu;
    try {
        lu = lu_factor(b_red);
    } catch (const SingularMatrix&) {
        throw DisconnectedNetwork(
            "compute_ptdf: slack-reduced susceptance matrix is singular (network not "
            "connected)");
    }

    // X = B_red^{-1}, column by column; H[l,b] = (theta_i - theta_j)/x_l for
    // a unit injection at b withdrawn at the slack.
    DenseMatrix x_inv(nr, nr);
    Vec unit(nr, 0.0);
    for (std::size_t c = 0; c < nr; ++c) {
        unit[c] = 1.0;
        Vec col = lu_solve(lu, unit);
        unit[c] = 0.0;
        for (std::size_t r = 0; r < nr; ++r) x_inv(r, c) = col[r];
    }

    DenseMatrix h(nf, nb);  // full bus-level PTDF, zero slack column
    for (std::size_t l = 0; l < nf; ++l) {
        const auto& ln = grid.lines[l];
        const std::size_t i = grid.bus_index(ln.from_bus);
        const std::size_t j = grid.bus_index(ln.to_bus);
        const double y = 1.0 / ln.reactance_pu;
        for (std::size_t b = 0; b < nb; ++b) {
            if (b == slack) continue;
            const double theta_i = (i == slack) ? 0.0 : x_inv(reduced_index(i), reduced_index(b));
            const double theta_j = (j == slack) ? 0.0 : x_inv(reduced_index(j), reduced_index(b));
            h(l, b) = y * (theta_i - theta_j);
        }
    }

    PtdfPartition p;
    p.h_gen = DenseMatrix(nf, grid.num_generators());
    p.h_load = DenseMatrix(nf, grid.loads.size());
    p.h_wind = DenseMatrix(nf, grid.num_wind());
    for (std::size_t l = 0; l < nf; ++l) {
        for (std::size_t k = 0; k < grid.num_generators(); ++k)
            p.h_gen(l, k) = h(l, grid.bus_index(grid.generators[k].bus));
        for (std::size_t k = 0; k < grid.loads.size(); ++k)
            p.h_load(l, k) = h(l, grid.bus_index(grid.loads[k].bus));
        for (std::size_t k = 0; k < grid.num_wind(); ++k)
            p.h_wind(l, k) = h(l, grid.bus_index(grid.wind_farms[k].bus));
    }
    return p;
}

Vec line_flows(const PtdfPartition& ptdf, const Vec& gen_mw, const Vec& load_mw,
               const Vec& wind_mw) {
    if (gen_mw.size() != ptdf.h_gen.cols || load_mw.size() != ptdf.h_load.cols ||
        wind_mw.size() != ptdf.h_wind.cols)
        throw DimensionMismatch("line_flows: vector sizes do not match the partition");
    Vec f = ptdf.h_gen.apply(gen_mw);
    const Vec fd = ptdf.h_load.apply(load_mw);
    const Vec fw = ptdf.h_wind.apply(wind_mw);
    for (std::size_t l = 0; l < f.size(); ++l) f[l] += fw[l] - fd[l];
    return f;
}

}  // namespace sced
