#pragma once

// Test-only oracles, deliberately independent of the library code paths they
// check: a direct DC power-flow solve, an exact rational-arithmetic LP
// enumerator, and brute-force convex-geometry predicates.

#include <cstdint>
#include <optional>
#include <vector>

#include "sced/grid.hpp"
#include "sced/numerics.hpp"

namespace oracle {

/// Line flows from solving B theta = P directly with its own Gaussian
/// elimination (no shared factorization code). `injection_by_bus` must be
/// balanced; the slack angle is pinned to zero.
sced::Vec dc_flows(const sced::GridCase& grid, const sced::Vec& injection_by_bus);

/// Exact LP:  min c'x  s.t. rows (A x {<=,==,>=} b), l <= x <= u (finite
/// bounds only, use +-kBig for effectively free variables). Solved by
/// enumerating all basic points (active-set n-subsets) in rational
/// arithmetic. Small problems only.
struct RationalLP {
    enum class Rel { Le, Eq, Ge };
    int n = 0;
    std::vector<double> c;
    std::vector<std::vector<double>> rows;
    std::vector<Rel> rels;
    std::vector<double> rhs;
    std::vector<double> lower, upper;

    void add_row(const std::vector<double>& a, Rel r, double b);
};

struct RationalLPResult {
    bool feasible = false;
    bool bounded_checked = true;  // enumeration assumes a bounded optimum exists
    double objective = 0.0;
    std::vector<double> x;
};

RationalLPResult solve_rational_lp(const RationalLP& lp);

/// Is p inside the simplex spanned by `verts` (barycentric solve, closed)?
bool point_in_simplex(const sced::Vec& p, const std::vector<sced::Vec>& verts,
                      double tol);

/// Exhaustive extreme-point test for dim <= 3: v is extreme iff it is not in
/// the convex hull of the others, checked over all (dim+1)-subsets
/// (Caratheodory) plus pairwise segments.
std::vector<std::size_t> brute_extreme_points(const std::vector<sced::Vec>& pts,
                                              std::size_t dim);

/// Pairwise-segment test only: true when v == t*x + (1-t)*y for two other
/// distinct points and t in (0,1).
bool on_segment_between_others(const std::vector<sced::Vec>& pts, std::size_t v,
                               double tol);

}  // namespace oracle
