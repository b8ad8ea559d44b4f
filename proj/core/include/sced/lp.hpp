#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sced/numerics.hpp"

namespace sced {

enum class Relation { LessEq, Equal, GreaterEq };

/// Identity of a constraint block. Scenario-tagged rows carry the index of
/// the scenario they came from so entire scenarios can be removed for
/// support-constraint probing.
struct RowGroup {
    enum class Kind { Deterministic, Scenario, DualAux, BoxAux };
    Kind kind = Kind::Deterministic;
    int index = -1;  // scenario id for Scenario, block id for aux kinds

    static RowGroup deterministic() { return {Kind::Deterministic, -1}; }
    static RowGroup scenario(int i) { return {Kind::Scenario, i}; }
    static RowGroup dual_aux(int i) { return {Kind::DualAux, i}; }
    static RowGroup box_aux(int i) { return {Kind::BoxAux, i}; }

    friend bool operator==(const RowGroup&, const RowGroup&) = default;
};

std::string group_label(const RowGroup& g);

/// Linear program in row form: min c'x subject to tagged constraint rows and
/// per-variable bounds. Rows are stored as a dense slab (row-major over
/// num_vars columns); scenario programs are row-heavy, so the slab keeps
/// allocation overhead per row at zero.
struct LPProblem {
    std::size_t num_vars = 0;
    Vec objective;
    Vec lower;  // -inf allowed
    Vec upper;  // +inf allowed
    std::vector<std::string> var_names;  // optional; empty or one per variable

    std::vector<double> row_coeffs;  // num_rows * num_vars
    std::vector<Relation> row_rel;
    Vec row_rhs;
    std::vector<RowGroup> row_group;

    LPProblem() = default;
    explicit LPProblem(std::size_t n);

    std::size_t num_rows() const { return row_rhs.size(); }
    std::span<const double> row(std::size_t r) const {
        return {row_coeffs.data() + r * num_vars, num_vars};
    }
    void reserve_rows(std::size_t n);
    void add_row(std::span<const double> coeffs, Relation rel, double rhs, RowGroup g);
    double row_activity(std::size_t r, const Vec& x) const;
    bool row_satisfied(std::size_t r, const Vec& x, double tol_scale) const;
    /// Worst signed violation of a row at x (positive = violated).
    double row_violation(std::size_t r, const Vec& x) const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LPStatus s);

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    Vec x;
    double objective = 0.0;
    Vec row_activity;  // one per problem row
    /// Basic-variable identities at termination: code j < num_vars is the
    /// structural variable j, code num_vars + r is the slack of internal row
    /// r (problem rows first, then the solver's bound rows). Sorted.
    std::vector<int> basis;
    std::size_t iterations = 0;
    /// Filled when SolveOptions.compute_duals: multipliers for the problem
    /// rows and the dual objective recomputed from the final basis.
    std::optional<Vec> dual;
    std::optional<double> dual_objective;
};

struct SolveOptions {
    bool compute_duals = false;
    /// Free variables are handled by shifting them onto [-free_shift, +inf)
    /// instead of splitting, so each variable keeps a single column and basis
    /// identities stay comparable across re-solves. The shift auto-expands
    /// (x32, twice) when an optimum pins a free variable against it.
    double free_shift = 64.0;
    std::size_t max_iterations = 0;  // 0 = automatic limit
};

/// Two-phase primal simplex (dense tableau, Bland's anti-cycling rule always
/// on). Infeasible/unbounded come back as statuses; NumericalBreakdown is
/// thrown only on pivot collapse below 1e-11.
LPSolution solve_lp(const LPProblem& p, const SolveOptions& opts = {});

/// Copy of p without the rows of the given group. Throws UnknownGroup when
/// no row carries the tag.
LPProblem remove_rows(const LPProblem& p, const RowGroup& group);

/// Human-readable dump of the rows (debugging aid).
void dump_lp(const LPProblem& p, std::ostream& os);

}  // namespace sced
