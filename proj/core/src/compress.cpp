#include "sced/compress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sced/lp.hpp"

namespace sced {

namespace {

constexpr std::size_t kMaxHullDim = 6;

double coordinate_scale(const std::vector<Vec>& pts, std::size_t dim) {
    double scale = 0.0;
    for (const auto& p : pts)
        for (std::size_t q = 0; q < dim; ++q) scale = std::max(scale, std::abs(p[q]));
    return std::max(scale, 1e-12);
}

/// Feasibility LP: is `target` a convex combination of `pool`?
bool in_convex_hull_of(const Vec& target, const std::vector<const Vec*>& pool,
                       std::size_t dim) {
    if (pool.empty()) return false;
    LPProblem lp(pool.size());
    for (std::size_t j = 0; j < pool.size(); ++j) {
        lp.lower[j] = 0.0;
        lp.objective[j] = 0.0;
    }
    Vec row(pool.size());
    for (std::size_t q = 0; q < dim; ++q) {
        for (std::size_t j = 0; j < pool.size(); ++j) row[j] = (*pool[j])[q];
        lp.add_row(row, Relation::Equal, target[q], RowGroup::deterministic());
    }
    std::fill(row.begin(), row.end(), 1.0);
    lp.add_row(row, Relation::Equal, 1.0, RowGroup::deterministic());
    return solve_lp(lp).status == LPStatus::Optimal;
}

struct Facet {
    std::vector<std::size_t> verts;  // d point indices
    Vec normal;                      // unit outward
    double offset = 0.0;             // normal . x = offset on the plane
    bool alive = true;
    std::vector<std::size_t> outside;
    double far_dist = 0.0;
    std::size_t far_pt = SIZE_MAX;
};

double det_small(DenseMatrix m) {
    const std::size_t n = m.rows;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        if (m(p, k) == 0.0) return 0.0;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            det = -det;
        }
        det *= m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return det;
}

/// Hyperplane through d points: normal orthogonal to the edge vectors via the
/// generalized cross product. Returns false when the points are affinely
/// dependent.
bool facet_plane(const std::vector<Vec>& pts, const std::vector<std::size_t>& verts,
                 std::size_t d, Vec& normal, double& offset) {
    DenseMatrix edges(d - 1, d);
    double edge_scale = 1.0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
        double norm2 = 0.0;
        for (std::size_t q = 0; q < d; ++q) {
            edges(i, q) = pts[verts[i + 1]][q] - pts[verts[0]][q];
            norm2 += edges(i, q) * edges(i, q);
        }
        edge_scale *= std::sqrt(norm2);
    }
    normal.assign(d, 0.0);
    DenseMatrix minor(d - 1, d - 1);
    double sign = 1.0;
    for (std::size_t skip = 0; skip < d; ++skip) {
        for (std::size_t i = 0; i + 1 < d; ++i) {
            std::size_t cc = 0;
            for (std::size_t q = 0; q < d; ++q) {
                if (q == skip) continue;
                minor(i, cc++) = edges(i, q);
            }
        }
        normal[skip] = sign * det_small(minor);
        sign = -sign;
    }
    double norm = 0.0;
    for (double v : normal) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 1e-10 * std::max(edge_scale, 1e-300))) return false;
    for (double& v : normal) v /= norm;
    offset = dot(normal, pts[verts[0]]);
    return true;
}

class HullBuilder {
public:
    HullBuilder(const std::vector<Vec>& pts, std::size_t d)
        : pts_(pts), d_(d), scale_(coordinate_scale(pts, d)) {
        eps_vis_ = 1e-10 * scale_ * double(d);
    }

    // Returns false when the incremental path hit a degeneracy it cannot
    // resolve; the caller then falls back to the exhaustive construction.
    bool build() {
        if (!initial_simplex()) return false;
        assign_initial_outside();

        std::vector<std::size_t> work;
        for (std::size_t f = 0; f < facets_.size(); ++f)
            if (!facets_[f].outside.empty()) work.push_back(f);

        while (!work.empty()) {
            const std::size_t fi = work.back();
            work.pop_back();
            if (!facets_[fi].alive || facets_[fi].outside.empty()) continue;
            const std::size_t apex = facets_[fi].far_pt;

            // Visible set by full scan; the facet count stays small at the
            // dimensions this supports.
            std::vector<std::size_t> visible;
            for (std::size_t f = 0; f < facets_.size(); ++f) {
                if (!facets_[f].alive) continue;
                if (dist(f, apex) > eps_vis_) visible.push_back(f);
            }
            if (visible.empty()) continue;  // apex became interior; drop

            // Horizon ridges: appear exactly once among visible facets.
            std::map<std::vector<std::size_t>, int> ridge_count;
            for (std::size_t f : visible) {
                for (std::size_t drop = 0; drop < d_; ++drop) {
                    std::vector<std::size_t> ridge;
                    for (std::size_t k = 0; k < d_; ++k)
                        if (k != drop) ridge.push_back(facets_[f].verts[k]);
                    std::sort(ridge.begin(), ridge.end());
                    ++ridge_count[ridge];
                }
            }

            std::vector<std::size_t> orphans;
            for (std::size_t f : visible) {
                facets_[f].alive = false;
                for (std::size_t p : facets_[f].outside)
                    if (p != apex) orphans.push_back(p);
            }

            std::vector<std::size_t> created;
            for (const auto& [ridge, count] : ridge_count) {
                if (count != 1) continue;
                std::vector<std::size_t> verts = ridge;
                verts.push_back(apex);
                Facet nf;
                nf.verts = verts;
                if (!facet_plane(pts_, verts, d_, nf.normal, nf.offset)) return false;
                const double din = dot(nf.normal, interior_) - nf.offset;
                if (std::abs(din) < 1e-12 * scale_) return false;
                if (din > 0.0) {
                    for (double& v : nf.normal) v = -v;
                    nf.offset = -nf.offset;
                }
                facets_.push_back(std::move(nf));
                created.push_back(facets_.size() - 1);
            }

            for (std::size_t p : orphans) {
                for (std::size_t f : created) {
                    const double dd = dist(f, p);
                    if (dd > eps_vis_) {
                        push_outside(f, p, dd);
                        break;
                    }
                }
            }
            for (std::size_t f : created)
                if (!facets_[f].outside.empty()) work.push_back(f);
        }

        // Containment sanity: every point inside every surviving facet.
        for (std::size_t f = 0; f < facets_.size(); ++f) {
            if (!facets_[f].alive) continue;
            for (std::size_t p = 0; p < pts_.size(); ++p)
                if (dist(f, p) > 1e-8 * std::max(1.0, scale_)) return false;
        }
        return true;
    }

    std::vector<std::size_t> candidate_vertices() const {
        std::vector<std::size_t> vs;
        for (const auto& f : facets_) {
            if (!f.alive) continue;
            vs.insert(vs.end(), f.verts.begin(), f.verts.end());
        }
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        return vs;
    }

    void collect_halfspaces(std::vector<Vec>& normals, Vec& offsets) const {
        for (const auto& f : facets_) {
            if (!f.alive) continue;
            bool dup = false;
            for (std::size_t h = 0; h < normals.size(); ++h) {
                if (std::abs(dot(normals[h], f.normal) - 1.0) < 1e-9 &&
                    std::abs(offsets[h] - f.offset) < 1e-8 * std::max(1.0, scale_)) {
                    dup = true;
                    break;
                }
            }
            if (!dup) {
                normals.push_back(f.normal);
                offsets.push_back(f.offset);
            }
        }
    }

private:
    double dist(std::size_t f, std::size_t p) const {
        return dot(facets_[f].normal, pts_[p]) - facets_[f].offset;
    }

    void push_outside(std::size_t f, std::size_t p, double d) {
        facets_[f].outside.push_back(p);
        if (d > facets_[f].far_dist) {
            facets_[f].far_dist = d;
            facets_[f].far_pt = p;
        }
    }

    bool initial_simplex() {
        const std::size_t n = pts_.size();
        std::size_t lexmin = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (pts_[i] < pts_[lexmin]) lexmin = i;

        std::vector<std::size_t> chosen{lexmin};
        std::vector<Vec> basis;  // orthonormal span directions
        while (chosen.size() < d_ + 1) {
            double best = -1.0;
            std::size_t best_i = SIZE_MAX;
            Vec best_perp;
            for (std::size_t i = 0; i < n; ++i) {
                Vec r(d_);
                for (std::size_t q = 0; q < d_; ++q)
                    r[q] = pts_[i][q] - pts_[chosen[0]][q];
                for (const auto& b : basis) {
                    const double proj = dot(r, b);
                    for (std::size_t q = 0; q < d_; ++q) r[q] -= proj * b[q];
                }
                double norm = std::sqrt(dot(r, r));
                if (norm > best) {
                    best = norm;
                    best_i = i;
                    best_perp = std::move(r);
                }
            }
            if (best < 1e-9 * scale_) return false;  // affinely degenerate
            for (double& v : best_perp) v /= best;
            basis.push_back(std::move(best_perp));
            chosen.push_back(best_i);
        }

        interior_.assign(d_, 0.0);
        for (std::size_t c : chosen)
            for (std::size_t q = 0; q < d_; ++q) interior_[q] += pts_[c][q];
        for (double& v : interior_) v /= double(d_ + 1);

        for (std::size_t drop = 0; drop < d_ + 1; ++drop) {
            Facet f;
            for (std::size_t k = 0; k < d_ + 1; ++k)
                if (k != drop) f.verts.push_back(chosen[k]);
            std::sort(f.verts.begin(), f.verts.end());
            if (!facet_plane(pts_, f.verts, d_, f.normal, f.offset)) return false;
            const double din = dot(f.normal, interior_) - f.offset;
            if (std::abs(din) < 1e-12 * scale_) return false;
            if (din > 0.0) {
                for (double& v : f.normal) v = -v;
                f.offset = -f.offset;
            }
            facets_.push_back(std::move(f));
        }
        return true;
    }

    void assign_initial_outside() {
        for (std::size_t p = 0; p < pts_.size(); ++p) {
            for (std::size_t f = 0; f < facets_.size(); ++f) {
                const double dd = dist(f, p);
                if (dd > eps_vis_) {
                    push_outside(f, p, dd);
                    break;
                }
            }
        }
    }

    const std::vector<Vec>& pts_;
    std::size_t d_;
    double scale_;
    double eps_vis_ = 0.0;
    Vec interior_;
    std::vector<Facet> facets_;
};

/// Keep only points that are not convex combinations of the other candidates.
std::vector<std::size_t> extreme_filter(const std::vector<Vec>& pts,
                                        const std::vector<std::size_t>& candidates,
                                        std::size_t dim) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::vector<const Vec*> pool;
        pool.reserve(candidates.size() - 1);
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != i) pool.push_back(&pts[candidates[j]]);
        if (!in_convex_hull_of(pts[candidates[i]], pool, dim))
            keep.push_back(candidates[i]);
    }
    return keep;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t d = idx.size();
    std::size_t k = d;
    while (k-- > 0) {
        if (idx[k] + (d - k) < n) {
            ++idx[k];
            for (std::size_t j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
        if (k == 0) break;
    }
    return false;
}

/// Exhaustive facet enumeration over a (small) vertex set; used when the
/// incremental path bails out on a degeneracy.
bool brute_facets(const std::vector<Vec>& pts, const std::vector<std::size_t>& verts,
                  std::size_t d, double scale, std::vector<Vec>& normals, Vec& offsets) {
    const std::size_t v = verts.size();
    if (v < d) return false;
    std::vector<std::size_t> pick(d);
    std::vector<std::size_t> idx(d);
    for (std::size_t k = 0; k < d; ++k) idx[k] = k;
    std::size_t combos = 0;
    do {
        if (++combos > 2'000'000) return false;
        for (std::size_t k = 0; k < d; ++k) pick[k] = verts[idx[k]];
        Vec n;
        double b = 0.0;
        if (!facet_plane(pts, pick, d, n, b)) continue;
        // valid facet iff all vertices lie on one side of the plane
        double lo = 0.0, hi = 0.0;
        for (std::size_t w : verts) {
            const double dd = dot(n, pts[w]) - b;
            lo = std::min(lo, dd);
            hi = std::max(hi, dd);
        }
        const double tol = 1e-9 * std::max(1.0, scale);
        if (hi > tol && lo < -tol) continue;
        if (hi > tol) {  // flip to outward orientation
            for (double& x : n) x = -x;
            b = -b;
        }
        bool dup = false;
        for (std::size_t h = 0; h < normals.size(); ++h) {
            if (std::abs(dot(normals[h], n) - 1.0) < 1e-9 &&
                std::abs(offsets[h] - b) < 1e-8 * std::max(1.0, scale)) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            normals.push_back(std::move(n));
            offsets.push_back(b);
        }
    } while (next_combination(idx, v));
    return !normals.empty();
}

bool halfspaces_contain_all(const std::vector<Vec>& pts, const std::vector<Vec>& normals,
                            const Vec& offsets, double tol) {
    for (const auto& p : pts)
        for (std::size_t h = 0; h < normals.size(); ++h)
            if (dot(normals[h], p) - offsets[h] > tol) return false;
    return true;
}

}  // namespace

Polytope convex_hull(const ScenarioSet& s) {
    const std::size_t d = s.dim;
    if (d < 2 || d > kMaxHullDim)
        throw DimensionTooHigh("convex_hull supports 2 <= dim <= " +
                               std::to_string(kMaxHullDim) + ", got " +
                               std::to_string(d));
    if (s.size() < d + 1)
        throw DegenerateInput("convex_hull: need at least dim+1 points");
    for (const auto& p : s.scenarios) {
        if (p.size() != d) throw DimensionMismatch("convex_hull: ragged scenario set");
        for (double v : p)
            if (!std::isfinite(v)) throw ValidationError("convex_hull: non-finite point");
    }

    // Deduplicate exact copies, keeping the lowest original index.
    std::vector<Vec> pts;
    std::vector<std::size_t> original_index;
    {
        std::map<Vec, std::size_t> seen;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (seen.emplace(s.scenarios[i], i).second) {
                pts.push_back(s.scenarios[i]);
                original_index.push_back(i);
            }
        }
    }
    if (pts.size() < d + 1)
        throw DegenerateInput("convex_hull: fewer than dim+1 distinct points");

    const double scale = coordinate_scale(pts, d);

    std::vector<std::size_t> candidates;
    std::vector<Vec> normals;
    Vec offsets;

    HullBuilder builder(pts, d);
    bool incremental_ok = builder.build();
    if (incremental_ok) {
        candidates = builder.candidate_vertices();
    } else {
        // wholesale extremity scan; also detects affine degeneracy
        candidates.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) candidates[i] = i;
    }

    std::vector<std::size_t> vertex_ids = extreme_filter(pts, candidates, d);
    if (vertex_ids.size() < d + 1)
        throw DegenerateInput(
            "convex_hull: points lie in a lower-dimensional affine subspace");

    if (incremental_ok) builder.collect_halfspaces(normals, offsets);
    if (normals.empty())
        if (!brute_facets(pts, vertex_ids, d, scale, normals, offsets))
            throw DegenerateInput(
                "convex_hull: points lie in a lower-dimensional affine subspace");

    const double tol = 1e-8 * std::max(1.0, scale);
    if (!halfspaces_contain_all(pts, normals, offsets, tol)) {
        // the incremental result was unusable after all; redo exhaustively
        std::vector<std::size_t> all(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) all[i] = i;
        vertex_ids = extreme_filter(pts, all, d);
        normals.clear();
        offsets.clear();
        if (vertex_ids.size() < d + 1 ||
            !brute_facets(pts, vertex_ids, d, scale, normals, offsets))
            throw DegenerateInput(
                "convex_hull: points lie in a lower-dimensional affine subspace");
        if (!halfspaces_contain_all(pts, normals, offsets, tol))
            throw NumericalBreakdown("convex_hull: could not certify facet set");
    }

    Polytope out;
    out.dim = d;
    std::sort(vertex_ids.begin(), vertex_ids.end());
    for (std::size_t id : vertex_ids) {
        out.vertices.push_back(pts[id]);
        out.vertex_indices.push_back(original_index[id]);
    }
    out.halfspace_normals = DenseMatrix(normals.size(), d);
    out.halfspace_offsets = offsets;
    for (std::size_t h = 0; h < normals.size(); ++h)
        for (std::size_t q = 0; q < d; ++q) out.halfspace_normals(h, q) = normals[h][q];
    return out;
}

Box box_hull(const ScenarioSet& s) {
    if (s.size() < 1) throw ValidationError("box_hull: empty scenario set");
    const std::size_t d = s.dim;
    Box out;
    out.dim = d;
    out.lower.assign(d, std::numeric_limits<double>::infinity());
    out.upper.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& p : s.scenarios) {
        if (p.size() != d) throw DimensionMismatch("box_hull: ragged scenario set");
        for (double v : p)
            if (!std::isfinite(v)) throw ValidationError("box_hull: non-finite point");
        for (std::size_t q = 0; q < d; ++q) {
            out.lower[q] = std::min(out.lower[q], p[q]);
            out.upper[q] = std::max(out.upper[q], p[q]);
        }
    }

    // Candidates: scenarios attaining at least one bound, with the set of
    // bounds each one attains as a bitmask (bit 2q = lower_q, 2q+1 = upper_q).
    const std::size_t nbits = 2 * d;
    std::vector<std::pair<std::size_t, std::uint64_t>> cands;
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::uint64_t mask = 0;
        for (std::size_t q = 0; q < d; ++q) {
            if (s.scenarios[i][q] == out.lower[q]) mask |= std::uint64_t(1) << (2 * q);
            if (s.scenarios[i][q] == out.upper[q])
                mask |= std::uint64_t(1) << (2 * q + 1);
        }
        if (mask) cands.emplace_back(i, mask);
    }

    // Drop candidates dominated by an earlier (lower-index) one.
    {
        std::vector<std::pair<std::size_t, std::uint64_t>> kept;
        for (const auto& c : cands) {
            bool dominated = false;
            for (const auto& k : kept)
                if ((c.second & ~k.second) == 0) {
                    dominated = true;
                    break;
                }
            if (!dominated) kept.push_back(c);
        }
        cands.swap(kept);
    }

    const std::uint64_t full = (std::uint64_t(1) << nbits) - 1;
    if (nbits <= 16 && cands.size() <= 64) {
        // exact minimum cover via subset DP; lexicographic tie-break
        struct Entry {
            bool reached = false;
            std::vector<std::size_t> picks;
        };
        std::vector<Entry> dp(std::size_t(full) + 1);
        dp[0].reached = true;
        auto better = [](const std::vector<std::size_t>& a,
                         const std::vector<std::size_t>& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        };
        for (std::uint64_t mask = 0; mask <= full; ++mask) {
            if (!dp[mask].reached) continue;
            for (const auto& [idx, cmask] : cands) {
                const std::uint64_t nm = mask | cmask;
                if (nm == mask) continue;
                std::vector<std::size_t> picks = dp[mask].picks;
                picks.push_back(idx);
                std::sort(picks.begin(), picks.end());
                if (!dp[nm].reached || better(picks, dp[nm].picks)) {
                    dp[nm].reached = true;
                    dp[nm].picks = std::move(picks);
                }
            }
        }
        out.touching = dp[full].picks;
    } else {
        // greedy cover by bound order, then prune redundant members so the
        // result stays minimal (not necessarily minimum under exotic ties)
        std::vector<std::size_t> picks;
        std::uint64_t covered = 0;
        for (std::size_t bit = 0; bit < nbits; ++bit) {
            if (covered & (std::uint64_t(1) << bit)) continue;
            for (const auto& [idx, cmask] : cands) {
                if (cmask & (std::uint64_t(1) << bit)) {
                    picks.push_back(idx);
                    covered |= cmask;
                    break;
                }
            }
        }
        std::sort(picks.begin(), picks.end());
        picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
        auto mask_of = [&](std::size_t idx) {
            for (const auto& [i, m] : cands)
                if (i == idx) return m;
            return std::uint64_t(0);
        };
        for (std::size_t i = 0; i < picks.size();) {
            std::uint64_t others = 0;
            for (std::size_t j = 0; j < picks.size(); ++j)
                if (j != i) others |= mask_of(picks[j]);
            if ((full & ~others) == 0)
                picks.erase(picks.begin() + long(i));
            else
                ++i;
        }
        out.touching = picks;
    }
    return out;
}

std::vector<std::size_t> compression_function(const ScenarioSet& s,
                                              CompressionMethod method) {
    if (method == CompressionMethod::Hull) return convex_hull(s).vertex_indices;
    return box_hull(s).touching;
}

std::size_t compression_complexity(const ScenarioSet& s, CompressionMethod method) {
    return compression_function(s, method).size();
}

bool contains(const Polytope& p, const Vec& w) {
    if (w.size() != p.dim) throw DimensionMismatch("contains: dimension mismatch");
    for (std::size_t h = 0; h < p.num_halfspaces(); ++h) {
        const double b = p.halfspace_offsets[h];
        const double tol = 1e-8 * std::max(1.0, std::abs(b));
        if (dot(p.halfspace_normals.row(h), w) > b + tol) return false;
    }
    return true;
}

bool contains(const Box& b, const Vec& w) {
    if (w.size() != b.dim) throw DimensionMismatch("contains: dimension mismatch");
    for (std::size_t q = 0; q < b.dim; ++q) {
        const double tol =
            1e-8 * std::max({1.0, std::abs(b.lower[q]), std::abs(b.upper[q])});
        if (w[q] < b.lower[q] - tol || w[q] > b.upper[q] + tol) return false;
    }
    return true;
}

namespace {
template <typename Set>
double outside_fraction(const Set& set, const ScenarioSet& holdout) {
    if (holdout.size() == 0)
        throw EmptyHoldout("estimate_compression_risk: empty holdout");
    std::size_t outside = 0;
    for (const auto& w : holdout.scenarios)
        if (!contains(set, w)) ++outside;
    return double(outside) / double(holdout.size());
}
}  // namespace

double estimate_compression_risk(const Polytope& p, const ScenarioSet& holdout) {
    return outside_fraction(p, holdout);
}

double estimate_compression_risk(const Box& b, const ScenarioSet& holdout) {
    return outside_fraction(b, holdout);
}

}  // namespace sced
