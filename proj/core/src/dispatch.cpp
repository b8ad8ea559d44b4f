#include "sced/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace sced {

namespace {

struct ProgramData {
    std::size_t n_g = 0, n_w = 0, n_f = 0;
    Vec load;
    Vec forecast;   // \hat{w}
    Vec hd_d;       // (H_d d) per line
    Vec hw_what;    // (H_w \hat{w}) per line
    double net_load = 0.0;
};

ProgramData gather(const GridCase& grid, const PtdfPartition& ptdf) {
    ProgramData d;
    d.n_g = grid.num_generators();
    d.n_w = grid.num_wind();
    d.n_f = grid.num_lines();
    if (ptdf.h_gen.cols != d.n_g || ptdf.h_wind.cols != d.n_w ||
        ptdf.h_gen.rows != d.n_f)
        throw DimensionMismatch("dispatch: PTDF partition does not match the case");
    d.load = grid.load_vector();
    d.forecast = grid.wind_forecast_vector();
    d.hd_d = ptdf.h_load.apply(d.load);
    d.hw_what = ptdf.h_wind.apply(d.forecast);
    d.net_load = grid.total_load() - grid.total_wind_forecast();
    return d;
}

void name_structural_vars(LPProblem& p, std::size_t n_g, bool with_eta) {
    p.var_names.resize(p.num_vars);
    for (std::size_t u = 0; u < n_g; ++u) p.var_names[u] = "g" + std::to_string(u);
    if (with_eta)
        for (std::size_t u = 0; u < n_g; ++u)
            p.var_names[n_g + u] = "eta" + std::to_string(u);
}

void set_gen_bounds(LPProblem& p, const GridCase& grid) {
    for (std::size_t u = 0; u < grid.num_generators(); ++u) {
        p.lower[u] = grid.generators[u].p_min_mw;
        p.upper[u] = grid.generators[u].p_max_mw;
        p.objective[u] = grid.generators[u].cost_per_mwh;
    }
}

void add_balance_row(LPProblem& p, const ProgramData& d) {
    Vec row(p.num_vars, 0.0);
    for (std::size_t u = 0; u < d.n_g; ++u) row[u] = 1.0;
    p.add_row(row, Relation::Equal, d.net_load, RowGroup::deterministic());
}

void add_eta_sum_row(LPProblem& p, std::size_t n_g) {
    Vec row(p.num_vars, 0.0);
    for (std::size_t u = 0; u < n_g; ++u) row[n_g + u] = 1.0;
    p.add_row(row, Relation::Equal, 1.0, RowGroup::deterministic());
}

/// One chance row in factor space: for all t in the uncertainty set,
///   (a0 - (q'eta) sbar)' t + gvec'g - S0 (q'eta) + k0 <= rhs
/// where sbar = M'1 and S0 = 1'offset come from the affine map.
struct RobustRow {
    Vec a0;     // m
    Vec q;      // n_g, scalar form multiplying eta
    Vec gvec;   // n_g
    double k0 = 0.0;
    double rhs = 0.0;
    bool line_row = false;
};

std::vector<RobustRow> enumerate_robust_rows(const GridCase& grid,
                                             const PtdfPartition& ptdf,
                                             const ProgramData& d, const AffineMap& map,
                                             const std::vector<std::size_t>& key_lines) {
    const std::size_t m = map.domain_dim();
    if (map.range_dim() != d.n_w)
        throw DimensionMismatch("robust rows: affine map range != wind farm count");

    // (H_w M) row by row, and H_w * offset
    DenseMatrix hw_m = ptdf.h_wind.matmul(map.matrix);
    Vec hw_off = ptdf.h_wind.apply(map.offset);

    std::vector<RobustRow> rows;
    rows.reserve(2 * key_lines.size() + 4 * d.n_g);
    for (std::size_t l : key_lines) {
        if (l >= d.n_f) throw DimensionMismatch("robust rows: key line out of range");
        const double cap = grid.lines[l].capacity_mw;
        const double k0 = hw_off[l] - d.hd_d[l] + d.hw_what[l];
        RobustRow up;
        up.line_row = true;
        up.a0.assign(hw_m.row(l).begin(), hw_m.row(l).end());
        up.q.assign(ptdf.h_gen.row(l).begin(), ptdf.h_gen.row(l).end());
        up.gvec = up.q;
        up.k0 = k0;
        up.rhs = cap;
        RobustRow dn = up;
        for (double& v : dn.a0) v = -v;
        for (double& v : dn.q) v = -v;
        for (double& v : dn.gvec) v = -v;
        dn.k0 = -k0;
        dn.rhs = cap;  // lower limit is -capacity
        rows.push_back(std::move(up));
        rows.push_back(std::move(dn));
    }
    for (std::size_t u = 0; u < d.n_g; ++u) {
        const auto& gen = grid.generators[u];
        RobustRow gen_up;
        gen_up.a0.assign(m, 0.0);
        gen_up.q.assign(d.n_g, 0.0);
        gen_up.gvec.assign(d.n_g, 0.0);
        gen_up.q[u] = 1.0;
        gen_up.gvec[u] = 1.0;
        gen_up.rhs = gen.p_max_mw;

        RobustRow gen_dn = gen_up;
        gen_dn.q[u] = -1.0;
        gen_dn.gvec[u] = -1.0;
        gen_dn.rhs = -gen.p_min_mw;

        RobustRow rsv_up = gen_up;
        rsv_up.gvec[u] = 0.0;
        rsv_up.rhs = gen.ramp_up_mw;

        RobustRow rsv_dn = gen_dn;
        rsv_dn.gvec[u] = 0.0;
        rsv_dn.rhs = -gen.ramp_down_mw;

        rows.push_back(std::move(gen_up));
        rows.push_back(std::move(gen_dn));
        rows.push_back(std::move(rsv_up));
        rows.push_back(std::move(rsv_dn));
    }
    return rows;
}

}  // namespace

LPProblem build_deterministic(const GridCase& grid, const PtdfPartition& ptdf) {
    const ProgramData d = gather(grid, ptdf);
    LPProblem p(d.n_g);
    set_gen_bounds(p, grid);
    name_structural_vars(p, d.n_g, false);
    p.reserve_rows(1 + 2 * d.n_f);
    add_balance_row(p, d);

    Vec row(p.num_vars, 0.0);
    for (std::size_t l = 0; l < d.n_f; ++l) {
        for (std::size_t u = 0; u < d.n_g; ++u) row[u] = ptdf.h_gen(l, u);
        const double shift = d.hd_d[l] - d.hw_what[l];
        const double cap = grid.lines[l].capacity_mw;
        p.add_row(row, Relation::LessEq, cap + shift, RowGroup::deterministic());
        p.add_row(row, Relation::GreaterEq, -cap + shift, RowGroup::deterministic());
    }
    return p;
}

std::vector<std::size_t> all_lines(const GridCase& grid) {
    std::vector<std::size_t> ls(grid.num_lines());
    std::iota(ls.begin(), ls.end(), std::size_t(0));
    return ls;
}

std::vector<std::size_t> select_key_lines(const GridCase& grid,
                                          const DispatchSolution& det,
                                          double threshold) {
    if (det.status != LPStatus::Optimal)
        throw RequiresOptimal("select_key_lines: deterministic solve is not optimal");
    if (!(threshold > 0.0) || threshold > 1.0)
        throw DomainError("select_key_lines: threshold must be in (0, 1]");
    if (det.nominal_flows.size() != grid.num_lines())
        throw DimensionMismatch("select_key_lines: flow vector size");
    std::vector<std::size_t> keys;
    for (std::size_t l = 0; l < grid.num_lines(); ++l)
        if (std::abs(det.nominal_flows[l]) > threshold * grid.lines[l].capacity_mw)
            keys.push_back(l);
    return keys;
}

LPProblem build_scenario_program(const GridCase& grid, const PtdfPartition& ptdf,
                                 const ScenarioSet& farm_scenarios,
                                 const std::vector<std::size_t>& key_lines,
                                 const std::vector<int>& scenario_ids) {
    const ProgramData d = gather(grid, ptdf);
    if (farm_scenarios.dim != d.n_w && farm_scenarios.size() > 0)
        throw DimensionMismatch(
            "build_scenario_program: scenarios must be in farm space (dim = n_w)");
    if (!scenario_ids.empty() && scenario_ids.size() != farm_scenarios.size())
        throw DimensionMismatch("build_scenario_program: scenario id count");

    const std::size_t n = farm_scenarios.size();
    LPProblem p(2 * d.n_g);
    set_gen_bounds(p, grid);
    name_structural_vars(p, d.n_g, true);
    p.reserve_rows(2 + n * (2 * key_lines.size() + 4 * d.n_g));
    add_balance_row(p, d);
    add_eta_sum_row(p, d.n_g);

    Vec row(p.num_vars, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& wt = farm_scenarios[i];
        const int id = scenario_ids.empty() ? int(i) : scenario_ids[i];
        const RowGroup g = RowGroup::scenario(id);
        double s = 0.0;
        for (double v : wt) s += v;
        const Vec hw_wt = ptdf.h_wind.apply(wt);

        for (std::size_t l : key_lines) {
            for (std::size_t u = 0; u < d.n_g; ++u) {
                row[u] = ptdf.h_gen(l, u);
                row[d.n_g + u] = -s * ptdf.h_gen(l, u);
            }
            const double shift = d.hd_d[l] - d.hw_what[l] - hw_wt[l];
            const double cap = grid.lines[l].capacity_mw;
            p.add_row(row, Relation::LessEq, cap + shift, g);
            p.add_row(row, Relation::GreaterEq, -cap + shift, g);
        }
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t u = 0; u < d.n_g; ++u) {
            row[u] = 1.0;
            row[d.n_g + u] = -s;
            p.add_row(row, Relation::LessEq, grid.generators[u].p_max_mw, g);
            p.add_row(row, Relation::GreaterEq, grid.generators[u].p_min_mw, g);
            row[u] = 0.0;
            p.add_row(row, Relation::LessEq, grid.generators[u].ramp_up_mw, g);
            p.add_row(row, Relation::GreaterEq, grid.generators[u].ramp_down_mw, g);
            row[d.n_g + u] = 0.0;
        }
    }
    return p;
}

LPProblem build_vertex_program(const GridCase& grid, const PtdfPartition& ptdf,
                               const Polytope& hull, const ScenarioSet& farm_scenarios,
                               const std::vector<std::size_t>& key_lines) {
    std::vector<int> ids;
    ids.reserve(hull.vertex_indices.size());
    for (std::size_t idx : hull.vertex_indices) {
        if (idx >= farm_scenarios.size())
            throw DimensionMismatch(
                "build_vertex_program: hull vertex index outside the scenario set");
        ids.push_back(int(idx));
    }
    const ScenarioSet verts = farm_scenarios.select(hull.vertex_indices);
    return build_scenario_program(grid, ptdf, verts, key_lines, ids);
}

std::pair<LPProblem, RobustCounterpart> build_box_counterpart(
    const GridCase& grid, const PtdfPartition& ptdf, const Box& factor_box,
    const AffineMap& map, const std::vector<std::size_t>& key_lines) {
    const ProgramData d = gather(grid, ptdf);
    const std::size_t m = map.domain_dim();
    if (factor_box.dim != m)
        throw DimensionMismatch("build_box_counterpart: box dim != map domain");

    const auto specs = enumerate_robust_rows(grid, ptdf, d, map, key_lines);
    Vec sbar(m, 0.0);  // M'1
    for (std::size_t f = 0; f < d.n_w; ++f)
        for (std::size_t q = 0; q < m; ++q) sbar[q] += map.matrix(f, q);
    double s0 = 0.0;  // 1'offset
    for (double v : map.offset) s0 += v;

    Vec center(m), radius(m);
    for (std::size_t q = 0; q < m; ++q) {
        center[q] = 0.5 * (factor_box.lower[q] + factor_box.upper[q]);
        radius[q] = 0.5 * (factor_box.upper[q] - factor_box.lower[q]);
        if (radius[q] < 0.0)
            throw ValidationError("build_box_counterpart: inverted box bounds");
    }
    const double s_center = dot(sbar, center);

    LPProblem p(2 * d.n_g + specs.size() * m);
    set_gen_bounds(p, grid);
    name_structural_vars(p, d.n_g, true);

    RobustCounterpart rc;
    rc.structural_vars = 2 * d.n_g;
    {
        double lo = s0, hi = s0;
        for (std::size_t q = 0; q < m; ++q) {
            lo += sbar[q] * center[q] - std::abs(sbar[q]) * radius[q];
            hi += sbar[q] * center[q] + std::abs(sbar[q]) * radius[q];
        }
        rc.s_min = lo;
        rc.s_max = hi;
    }

    for (std::size_t j = 0; j < specs.size(); ++j) {
        const std::size_t ubase = 2 * d.n_g + j * m;
        for (std::size_t q = 0; q < m; ++q) {
            p.lower[ubase + q] = 0.0;  // u >= |a| >= 0 is implied
            p.var_names[ubase + q] =
                "u" + std::to_string(j) + "_" + std::to_string(q);
        }
    }

    p.reserve_rows(2 + specs.size() * (2 * m + 1));
    add_balance_row(p, d);
    add_eta_sum_row(p, d.n_g);

    Vec row(p.num_vars, 0.0);
    for (std::size_t j = 0; j < specs.size(); ++j) {
        const RobustRow& s = specs[j];
        const std::size_t ubase = 2 * d.n_g + j * m;
        const RowGroup g = RowGroup::box_aux(int(j));

        // u_q >= +-a_q(eta), written as <= rows
        for (std::size_t q = 0; q < m; ++q) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t u = 0; u < d.n_g; ++u)
                row[d.n_g + u] = -sbar[q] * s.q[u];
            row[ubase + q] = -1.0;
            p.add_row(row, Relation::LessEq, -s.a0[q], g);
            for (std::size_t u = 0; u < d.n_g; ++u)
                row[d.n_g + u] = sbar[q] * s.q[u];
            p.add_row(row, Relation::LessEq, s.a0[q], g);
        }
        // value row: worst case over the box
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t u = 0; u < d.n_g; ++u) {
            row[u] = s.gvec[u];
            row[d.n_g + u] = -(s_center + s0) * s.q[u];
        }
        for (std::size_t q = 0; q < m; ++q) row[ubase + q] = radius[q];
        const double rhs = s.rhs - s.k0 - dot(s.a0, center);
        p.add_row(row, Relation::LessEq, rhs, g);

        rc.blocks.push_back({"box-row-" + std::to_string(j), ubase, m,
                             p.num_rows() - 1});
    }
    return {std::move(p), std::move(rc)};
}

std::pair<LPProblem, RobustCounterpart> build_hull_dual_counterpart(
    const GridCase& grid, const PtdfPartition& ptdf, const Polytope& factor_hull,
    const AffineMap& map, const std::vector<std::size_t>& key_lines,
    const HullDualOptions& options) {
    const ProgramData d = gather(grid, ptdf);
    const std::size_t m = map.domain_dim();
    if (factor_hull.dim != m)
        throw DimensionMismatch("build_hull_dual_counterpart: hull dim != map domain");
    const std::size_t n_h = factor_hull.num_halfspaces();
    if (n_h == 0)
        throw MissingHalfspaces(
            "build_hull_dual_counterpart: polytope has no halfspace representation");

    const auto specs = enumerate_robust_rows(grid, ptdf, d, map, key_lines);
    Vec sbar(m, 0.0);
    for (std::size_t f = 0; f < d.n_w; ++f)
        for (std::size_t q = 0; q < m; ++q) sbar[q] += map.matrix(f, q);
    double s0 = 0.0;
    for (double v : map.offset) s0 += v;

    std::size_t n_line_rows = 0;
    for (const auto& s : specs)
        if (s.line_row) ++n_line_rows;

    LPProblem p(2 * d.n_g + n_line_rows * n_h);
    set_gen_bounds(p, grid);
    name_structural_vars(p, d.n_g, true);

    RobustCounterpart rc;
    rc.structural_vars = 2 * d.n_g;

    // range of 1'w over the set, for the generator / reserve rows
    if (options.robustify_gen_reserve) {
        if (!factor_hull.vertices.empty()) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& v : factor_hull.vertices) {
                const double s = dot(sbar, v) + s0;
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            rc.s_min = lo;
            rc.s_max = hi;
        } else {
            // extremize 1'(Mt + c) over the halfspaces
            for (int dir = 0; dir < 2; ++dir) {
                LPProblem ext(m);
                for (std::size_t q = 0; q < m; ++q)
                    ext.objective[q] = (dir == 0 ? 1.0 : -1.0) * sbar[q];
                Vec hrow(m);
                for (std::size_t h = 0; h < n_h; ++h) {
                    for (std::size_t q = 0; q < m; ++q)
                        hrow[q] = factor_hull.halfspace_normals(h, q);
                    ext.add_row(hrow, Relation::LessEq, factor_hull.halfspace_offsets[h],
                                RowGroup::deterministic());
                }
                const LPSolution sol = solve_lp(ext);
                if (sol.status != LPStatus::Optimal)
                    throw InvalidPolytope(
                        "build_hull_dual_counterpart: 1'w range unbounded over the "
                        "polytope; provide vertices or disable gen/reserve "
                        "robustification");
                if (dir == 0)
                    rc.s_min = sol.objective + s0;
                else
                    rc.s_max = -sol.objective + s0;
            }
        }
    }

    std::size_t lam_base = 2 * d.n_g;
    for (std::size_t j = 0, lam = 0; j < specs.size(); ++j) {
        if (!specs[j].line_row) continue;
        for (std::size_t h = 0; h < n_h; ++h) {
            p.lower[lam_base + lam * n_h + h] = 0.0;
            p.var_names[lam_base + lam * n_h + h] =
                "lam" + std::to_string(j) + "_" + std::to_string(h);
        }
        ++lam;
    }

    p.reserve_rows(2 + n_line_rows * (m + 1) +
                   (options.robustify_gen_reserve ? (specs.size() - n_line_rows) * 2 : 0));
    add_balance_row(p, d);
    add_eta_sum_row(p, d.n_g);

    Vec row(p.num_vars, 0.0);
    std::size_t lam = 0;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        const RobustRow& s = specs[j];
        if (s.line_row) {
            const std::size_t vbase = lam_base + lam * n_h;
            const RowGroup g = RowGroup::dual_aux(int(j));
            // stationarity: lambda'A + (q'eta) sbar = a0
            for (std::size_t q = 0; q < m; ++q) {
                std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t h = 0; h < n_h; ++h)
                    row[vbase + h] = factor_hull.halfspace_normals(h, q);
                for (std::size_t u = 0; u < d.n_g; ++u)
                    row[d.n_g + u] = sbar[q] * s.q[u];
                p.add_row(row, Relation::Equal, s.a0[q], g);
            }
            // value: lambda'b + gvec'g - S0 (q'eta) + k0 <= rhs
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t h = 0; h < n_h; ++h)
                row[vbase + h] = factor_hull.halfspace_offsets[h];
            for (std::size_t u = 0; u < d.n_g; ++u) {
                row[u] = s.gvec[u];
                row[d.n_g + u] = -s0 * s.q[u];
            }
            p.add_row(row, Relation::LessEq, s.rhs - s.k0, g);
            rc.blocks.push_back({"line-dual-" + std::to_string(j), vbase, n_h,
                                 p.num_rows() - 1});
            ++lam;
        } else if (options.robustify_gen_reserve) {
            // a0 = 0 here, so the constraint collapses to
            // -(q'eta) s + gvec'g + k0 <= rhs at both ends of the 1'w range.
            for (const double s_end : {rc.s_min, rc.s_max}) {
                std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t u = 0; u < d.n_g; ++u) {
                    row[u] = s.gvec[u];
                    row[d.n_g + u] = -s_end * s.q[u];
                }
                p.add_row(row, Relation::LessEq, s.rhs - s.k0,
                          RowGroup::deterministic());
            }
        }
    }
    return {std::move(p), std::move(rc)};
}

RowGenResult solve_rows_lazily(const LPProblem& p,
                               const std::vector<int>& excluded_scenarios,
                               const std::vector<std::size_t>& warm_rows) {
    const std::size_t nr = p.num_rows();
    std::unordered_set<int> excluded(excluded_scenarios.begin(),
                                     excluded_scenarios.end());
    auto eligible = [&](std::size_t r) {
        const RowGroup& g = p.row_group[r];
        if (g.kind != RowGroup::Kind::Scenario) return true;
        return excluded.find(g.index) == excluded.end();
    };

    std::vector<char> in_working(nr, 0), purged_once(nr, 0);
    std::vector<std::size_t> working;
    for (std::size_t r = 0; r < nr; ++r) {
        if (p.row_group[r].kind != RowGroup::Kind::Scenario && eligible(r)) {
            working.push_back(r);
            in_working[r] = 1;
        }
    }
    for (std::size_t r : warm_rows) {
        if (r < nr && !in_working[r] && eligible(r)) {
            working.push_back(r);
            in_working[r] = 1;
        }
    }

    RowGenResult result;
    constexpr std::size_t kMaxIter = 400;
    constexpr std::size_t kAddPerIter = 200;

    for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
        LPProblem wp(p.num_vars);
        wp.objective = p.objective;
        wp.lower = p.lower;
        wp.upper = p.upper;
        wp.var_names = p.var_names;
        std::sort(working.begin(), working.end());
        wp.reserve_rows(working.size());
        for (std::size_t r : working)
            wp.add_row(p.row(r), p.row_rel[r], p.row_rhs[r], p.row_group[r]);

        LPSolution sol = solve_lp(wp);
        ++result.lp_solves;

        if (sol.status == LPStatus::Infeasible) {
            result.solution = std::move(sol);
            result.working_rows = working;
            return result;
        }
        if (sol.status == LPStatus::Unbounded) {
            bool grew = false;
            for (std::size_t r = 0; r < nr; ++r) {
                if (!in_working[r] && eligible(r)) {
                    working.push_back(r);
                    in_working[r] = 1;
                    grew = true;
                }
            }
            if (!grew) {
                result.solution = std::move(sol);
                result.working_rows = working;
                return result;
            }
            if (working.size() > 60000)
                throw NumericalBreakdown(
                    "solve_rows_lazily: unbounded relaxation with too many rows to "
                    "densify");
            continue;
        }

        // violation scan over rows not yet in the working set
        struct Cand {
            std::size_t row;
            double rel;
        };
        std::vector<Cand> violated;
        for (std::size_t r = 0; r < nr; ++r) {
            if (in_working[r] || !eligible(r)) continue;
            const double v = p.row_violation(r, sol.x);
            const double rel = v / std::max(1.0, std::abs(p.row_rhs[r]));
            if (rel > 1e-9) violated.push_back({r, rel});
        }

        if (violated.empty()) {
            result.solution = std::move(sol);
            result.solution.row_activity.resize(nr);
            for (std::size_t r = 0; r < nr; ++r)
                result.solution.row_activity[r] = p.row_activity(r, result.solution.x);
            result.working_rows = working;
            return result;
        }

        const std::size_t take = std::min(violated.size(), kAddPerIter);
        std::partial_sort(violated.begin(), violated.begin() + long(take),
                          violated.end(),
                          [](const Cand& a, const Cand& b) { return a.rel > b.rel; });
        // purge scenario rows that went slack (once per row, so the process
        // still terminates)
        std::vector<std::size_t> kept;
        kept.reserve(working.size());
        for (std::size_t k = 0; k < working.size(); ++k) {
            const std::size_t r = working[k];
            bool keep = true;
            if (p.row_group[r].kind == RowGroup::Kind::Scenario && !purged_once[r]) {
                const double slack = -p.row_violation(r, sol.x);
                if (slack > 1e-3 * std::max(1.0, std::abs(p.row_rhs[r]))) {
                    keep = false;
                    purged_once[r] = 1;
                    in_working[r] = 0;
                }
            }
            if (keep) kept.push_back(r);
        }
        working.swap(kept);
        for (std::size_t k = 0; k < take; ++k) {
            working.push_back(violated[k].row);
            in_working[violated[k].row] = 1;
        }
    }
    throw NumericalBreakdown("solve_rows_lazily: row generation did not converge");
}

DispatchSolution solve_dispatch(const LPProblem& p, const GridCase& grid,
                                const PtdfPartition& ptdf) {
    const std::size_t n_g = grid.num_generators();
    if (p.num_vars < n_g)
        throw DimensionMismatch("solve_dispatch: program has fewer columns than "
                                "generators");

    bool has_scenario_rows = false;
    for (const auto& g : p.row_group)
        if (g.kind == RowGroup::Kind::Scenario) {
            has_scenario_rows = true;
            break;
        }

    DispatchSolution out;
    if (has_scenario_rows && p.num_rows() > 400) {
        RowGenResult rg = solve_rows_lazily(p);
        out.lp = std::move(rg.solution);
        out.working_rows = std::move(rg.working_rows);
    } else {
        out.lp = solve_lp(p);
        if (out.lp.status == LPStatus::Optimal) {
            out.working_rows.resize(p.num_rows());
            std::iota(out.working_rows.begin(), out.working_rows.end(),
                      std::size_t(0));
        }
    }
    out.status = out.lp.status;
    if (out.status != LPStatus::Optimal) return out;

    out.gen_mw.assign(out.lp.x.begin(), out.lp.x.begin() + long(n_g));
    const bool has_eta = p.num_vars >= 2 * n_g;
    if (has_eta)
        out.participation.assign(out.lp.x.begin() + long(n_g),
                                 out.lp.x.begin() + long(2 * n_g));
    out.cost = out.lp.objective;
    out.nominal_flows =
        line_flows(ptdf, out.gen_mw, grid.load_vector(), grid.wind_forecast_vector());

    // invariant checks on the extracted dispatch
    if (has_eta) {
        double esum = 0.0;
        for (double v : out.participation) esum += v;
        if (std::abs(esum - 1.0) > 1e-9)
            throw NumericalBreakdown("solve_dispatch: participation factors sum to " +
                                     std::to_string(esum));
    }
    {
        double gsum = 0.0;
        for (double v : out.gen_mw) gsum += v;
        const double target = grid.total_load() - grid.total_wind_forecast();
        if (std::abs(gsum - target) > 1e-7 * std::max(1.0, std::abs(target)))
            throw NumericalBreakdown("solve_dispatch: power balance violated");
        for (std::size_t u = 0; u < n_g; ++u) {
            const double tol =
                1e-7 * std::max(1.0, std::abs(grid.generators[u].p_max_mw));
            if (out.gen_mw[u] < grid.generators[u].p_min_mw - tol ||
                out.gen_mw[u] > grid.generators[u].p_max_mw + tol)
                throw NumericalBreakdown("solve_dispatch: generator bound violated");
        }
    }

    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        const RowGroup& g = p.row_group[r];
        if (g.kind != RowGroup::Kind::Scenario) continue;
        const double act_tol = 1e-6 * std::max(1.0, std::abs(p.row_rhs[r]));
        if (out.lp.row_activity.size() == p.num_rows() &&
            p.row_violation(r, out.lp.x) >= -act_tol) {
            if (out.binding_scenarios.empty() || out.binding_scenarios.back() != g.index)
                out.binding_scenarios.push_back(g.index);
        }
    }
    std::sort(out.binding_scenarios.begin(), out.binding_scenarios.end());
    out.binding_scenarios.erase(
        std::unique(out.binding_scenarios.begin(), out.binding_scenarios.end()),
        out.binding_scenarios.end());
    return out;
}

double estimate_solution_risk(const DispatchSolution& sol, const GridCase& grid,
                              const PtdfPartition& ptdf,
                              const ScenarioSet& holdout_farm,
                              const std::vector<std::size_t>& key_lines) {
    if (holdout_farm.size() == 0)
        throw EmptyHoldout("estimate_solution_risk: empty holdout");
    if (sol.status != LPStatus::Optimal)
        throw RequiresOptimal("estimate_solution_risk: solution is not optimal");
    const std::size_t n_g = grid.num_generators();
    if (holdout_farm.dim != grid.num_wind())
        throw DimensionMismatch("estimate_solution_risk: holdout must be farm-space");
    const Vec eta = sol.participation.empty() ? Vec(n_g, 0.0) : sol.participation;

    const Vec base_flow = sol.nominal_flows;  // flows at the forecast
    const Vec hg_eta = ptdf.h_gen.apply(eta);

    std::size_t violations = 0;
    for (const auto& wt : holdout_farm.scenarios) {
        double s = 0.0;
        for (double v : wt) s += v;
        bool violated = false;
        const Vec hw_wt = ptdf.h_wind.apply(wt);
        for (std::size_t l : key_lines) {
            const double f = base_flow[l] - s * hg_eta[l] + hw_wt[l];
            const double cap = grid.lines[l].capacity_mw;
            const double tol = 1e-8 * std::max(1.0, cap);
            if (f > cap + tol || f < -cap - tol) {
                violated = true;
                break;
            }
        }
        if (!violated) {
            for (std::size_t u = 0; u < n_g; ++u) {
                const auto& gen = grid.generators[u];
                const double adj = sol.gen_mw[u] - s * eta[u];
                const double gtol = 1e-8 * std::max({1.0, std::abs(gen.p_min_mw),
                                                     std::abs(gen.p_max_mw)});
                const double resp = -s * eta[u];
                const double rtol = 1e-8 * std::max({1.0, std::abs(gen.ramp_down_mw),
                                                     std::abs(gen.ramp_up_mw)});
                if (adj > gen.p_max_mw + gtol || adj < gen.p_min_mw - gtol ||
                    resp > gen.ramp_up_mw + rtol || resp < gen.ramp_down_mw - rtol) {
                    violated = true;
                    break;
                }
            }
        }
        if (violated) ++violations;
    }
    return double(violations) / double(holdout_farm.size());
}

}  // namespace sced
