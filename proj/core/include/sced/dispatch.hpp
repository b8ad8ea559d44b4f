#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sced/compress.hpp"
#include "sced/grid.hpp"
#include "sced/lp.hpp"
#include "sced/scenario.hpp"

namespace sced {

// Variable layout shared by every program builder in this module:
// columns [0, n_g) are generator setpoints g, and when the program carries an
// affine response, columns [n_g, 2*n_g) are the participation factors eta.
// Counterpart builders append their dual / auxiliary variables after these.

/// Optimal dispatch extracted from an LP solution.
struct DispatchSolution {
    LPStatus status = LPStatus::Infeasible;
    Vec gen_mw;                // g*
    Vec participation;         // eta*; empty for deterministic programs
    double cost = 0.0;
    Vec nominal_flows;         // line flows at the wind forecast
    std::vector<int> binding_scenarios;  // scenario groups with an active row
    LPSolution lp;             // activities, basis, status detail
    std::vector<std::size_t> working_rows;  // rows used by the lazy solver
};

/// Bookkeeping for robust counterparts: where each dual / auxiliary variable
/// block lives and which row carries the robustified constraint value.
struct RobustCounterpart {
    struct Block {
        std::string label;
        std::size_t var_begin = 0;
        std::size_t var_count = 0;
        std::size_t value_row = 0;
    };
    std::vector<Block> blocks;
    std::size_t structural_vars = 0;  // g + eta
    double s_min = 0.0;               // range of 1'w over the uncertainty set,
    double s_max = 0.0;               // used for generator / reserve rows
};

/// Deterministic DC dispatch: min c'g with power balance, generator bounds
/// and line limits at zero forecast error. No eta.
LPProblem build_deterministic(const GridCase& grid, const PtdfPartition& ptdf);

/// Lines loaded above threshold * capacity in an optimal deterministic
/// dispatch. Throws RequiresOptimal when det is not optimal.
std::vector<std::size_t> select_key_lines(const GridCase& grid,
                                          const DispatchSolution& det,
                                          double threshold);

/// Every line index; the default "no key-line filtering" choice.
std::vector<std::size_t> all_lines(const GridCase& grid);

/// Scenario program over farm-space error vectors: deterministic rows plus,
/// per scenario, line limits on the key lines and generator / reserve limits
/// under the affine response. Rows are tagged scenario(id); ids default to
/// 0..N-1 and can be overridden (the vertex program passes original indices).
LPProblem build_scenario_program(const GridCase& grid, const PtdfPartition& ptdf,
                                 const ScenarioSet& farm_scenarios,
                                 const std::vector<std::size_t>& key_lines,
                                 const std::vector<int>& scenario_ids = {});

/// Scenario program restricted to the hull vertices. `farm_scenarios` must be
/// index-aligned with the set the hull was computed on (identical when the
/// hull is over farm space; the affine projection preserves indices).
LPProblem build_vertex_program(const GridCase& grid, const PtdfPartition& ptdf,
                               const Polytope& hull,
                               const ScenarioSet& farm_scenarios,
                               const std::vector<std::size_t>& key_lines);

/// Robust counterpart over a factor-space box mapped to farms: each chance
/// row gains m auxiliary variables bounding the factor coefficients'
/// magnitudes, 2m support rows, and one value row (2m+1 rows per constraint).
std::pair<LPProblem, RobustCounterpart> build_box_counterpart(
    const GridCase& grid, const PtdfPartition& ptdf, const Box& factor_box,
    const AffineMap& map, const std::vector<std::size_t>& key_lines);

struct HullDualOptions {
    /// Generator / reserve rows depend on the error only through the scalar
    /// 1'w, so by default they are robustified over its vertex range instead
    /// of carrying dual blocks. Disable for halfspace-only polytopes without
    /// a bounded 1'w range.
    bool robustify_gen_reserve = true;
};

/// Method-1 counterpart: per robustified line row a dual block lambda >= 0
/// over the hull halfspaces, with stationarity rows tying lambda'A to the
/// row's factor coefficients and a value row lambda'b + (deterministic part)
/// <= limit. Throws MissingHalfspaces / InvalidPolytope.
std::pair<LPProblem, RobustCounterpart> build_hull_dual_counterpart(
    const GridCase& grid, const PtdfPartition& ptdf, const Polytope& factor_hull,
    const AffineMap& map, const std::vector<std::size_t>& key_lines,
    const HullDualOptions& options = {});

/// Result of the lazy (row-generating) solve used for scenario-heavy
/// programs: the final solution is feasible for every row of the input.
struct RowGenResult {
    LPSolution solution;
    std::vector<std::size_t> working_rows;
    std::size_t lp_solves = 0;
};

/// Solve a program whose scenario rows are activated lazily: deterministic /
/// aux rows always participate, scenario rows are pulled in only when
/// violated. `excluded_scenarios` removes whole scenario groups without
/// materializing a copy; `warm_rows` seeds the working set (e.g. from a
/// previous solve of the same program).
RowGenResult solve_rows_lazily(const LPProblem& p,
                               const std::vector<int>& excluded_scenarios = {},
                               const std::vector<std::size_t>& warm_rows = {});

/// Solve any program built by this module and extract the dispatch. Uses the
/// lazy solver when scenario rows dominate, plain solve_lp otherwise.
DispatchSolution solve_dispatch(const LPProblem& p, const GridCase& grid,
                                const PtdfPartition& ptdf);

/// Fraction of holdout scenarios under which (g*, eta*) violates any line,
/// generator or reserve limit (tolerance 1e-8 * scale). Throws EmptyHoldout.
double estimate_solution_risk(const DispatchSolution& sol, const GridCase& grid,
                              const PtdfPartition& ptdf,
                              const ScenarioSet& holdout_farm,
                              const std::vector<std::size_t>& key_lines);

}  // namespace sced
