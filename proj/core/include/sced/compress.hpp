#pragma once

#include <cstddef>
#include <vector>

#include "sced/numerics.hpp"
#include "sced/scenario.hpp"

namespace sced {

/// Convex hull of a scenario set. Vertices are always members of the input
/// set (tracked by index). Halfspaces use the A w <= b convention with unit
/// outward normals; every input scenario satisfies them within 1e-8 * scale.
struct Polytope {
    std::size_t dim = 0;
    std::vector<Vec> vertices;
    std::vector<std::size_t> vertex_indices;  // into the input scenario set
    DenseMatrix halfspace_normals;            // n_h x dim
    Vec halfspace_offsets;                    // n_h

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_halfspaces() const { return halfspace_offsets.size(); }
};

/// Componentwise interval relaxation of a scenario set; `touching` is a
/// minimum-cardinality index set attaining every bound (lowest indices on
/// ties).
struct Box {
    std::size_t dim = 0;
    Vec lower;  // tau lower
    Vec upper;  // tau upper
    std::vector<std::size_t> touching;
};

enum class CompressionMethod { Hull, Box };

/// Incremental (quickhull-style) convex hull for 2 <= dim <= 6.
/// Throws DegenerateInput when the points span a lower-dimensional affine
/// subspace (project first), DimensionTooHigh outside the supported range.
Polytope convex_hull(const ScenarioSet& s);

/// Componentwise min/max box; one pass over the data.
Box box_hull(const ScenarioSet& s);

/// Smallest index subset that reconstructs the compressed set: hull vertex
/// indices, or a minimum cover of the 2*dim box bounds.
std::vector<std::size_t> compression_function(const ScenarioSet& s,
                                              CompressionMethod method);

/// Cardinality of compression_function. For Box this never exceeds 2*dim.
std::size_t compression_complexity(const ScenarioSet& s, CompressionMethod method);

/// Closed-set membership with tolerance 1e-8 scaled by coordinate magnitude.
bool contains(const Polytope& p, const Vec& w);
bool contains(const Box& b, const Vec& w);

/// Fraction of holdout scenarios whose addition would change the compressed
/// set; for hull and box this is the fraction strictly outside. Throws
/// EmptyHoldout.
double estimate_compression_risk(const Polytope& p, const ScenarioSet& holdout);
double estimate_compression_risk(const Box& b, const ScenarioSet& holdout);

}  // namespace sced
