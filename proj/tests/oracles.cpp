#include "oracles.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

sced::Vec dc_flows(const sced::GridCase& grid, const sced::Vec& injection_by_bus) {
    const std::size_t nb = grid.num_buses();
    if (injection_by_bus.size() != nb) throw std::runtime_error("oracle: bad injection");
    const std::size_t slack = grid.slack_index();

    // full susceptance matrix
    std::vector<std::vector<double>> b(nb, std::vector<double>(nb, 0.0));
    for (const auto& l : grid.lines) {
        const std::size_t i = grid.bus_index(l.from_bus);
        const std::size_t j = grid.bus_index(l.to_bus);
        const double y = 1.0 / l.reactance_pu;
        b[i][i] += y;
        b[j][j] += y;
        b[i][j] -= y;
        b[j][i] -= y;
    }

    // eliminate over non-slack buses with naive partial pivoting
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < nb; ++i)
        if (i != slack) keep.push_back(i);
    const std::size_t n = keep.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = b[keep[i]][keep[j]];
        a[i][n] = injection_by_bus[keep[i]];
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        if (std::abs(a[k][k]) < 1e-12) throw std::runtime_error("oracle: singular B");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j <= n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    sced::Vec theta_red(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = a[ii][n];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= a[ii][j] * theta_red[j];
        theta_red[ii] = acc / a[ii][ii];
    }
    sced::Vec theta(nb, 0.0);
    for (std::size_t i = 0; i < n; ++i) theta[keep[i]] = theta_red[i];

    sced::Vec flows(grid.num_lines());
    for (std::size_t l = 0; l < grid.num_lines(); ++l) {
        const auto& ln = grid.lines[l];
        flows[l] = (theta[grid.bus_index(ln.from_bus)] -
                    theta[grid.bus_index(ln.to_bus)]) /
                   ln.reactance_pu;
    }
    return flows;
}

void RationalLP::add_row(const std::vector<double>& a, Rel r, double b) {
    rows.push_back(a);
    rels.push_back(r);
    rhs.push_back(b);
}

namespace {

using Rat = mpq_class;

Rat to_rat(double v) {
    // doubles in our fixtures are short decimals; mpq_class(double) is exact
    return Rat(v);
}

/// Solve an n x n rational system; returns false when singular.
bool solve_sq(std::vector<std::vector<Rat>> m, std::vector<Rat> b,
              std::vector<Rat>& out) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m[p][k] == 0) ++p;
        if (p == n) return false;
        std::swap(m[k], m[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (m[i][k] == 0) continue;
            Rat f = m[i][k] / m[k][k];
            for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
            b[i] -= f * b[k];
        }
    }
    out.assign(n, Rat(0));
    for (std::size_t ii = n; ii-- > 0;) {
        Rat acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= m[ii][j] * out[j];
        out[ii] = acc / m[ii][ii];
    }
    return true;
}

}  // namespace

RationalLPResult solve_rational_lp(const RationalLP& lp) {
    const std::size_t n = std::size_t(lp.n);
    // constraint pool: every row plus every finite bound, as a'x (rel) b
    struct Con {
        std::vector<Rat> a;
        RationalLP::Rel rel;
        Rat b;
    };
    std::vector<Con> cons;
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        Con c;
        c.a.resize(n);
        for (std::size_t j = 0; j < n; ++j) c.a[j] = to_rat(lp.rows[r][j]);
        c.rel = lp.rels[r];
        c.b = to_rat(lp.rhs[r]);
        cons.push_back(std::move(c));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isfinite(lp.lower[j])) {
            Con c;
            c.a.assign(n, Rat(0));
            c.a[j] = 1;
            c.rel = RationalLP::Rel::Ge;
            c.b = to_rat(lp.lower[j]);
            cons.push_back(std::move(c));
        }
        if (std::isfinite(lp.upper[j])) {
            Con c;
            c.a.assign(n, Rat(0));
            c.a[j] = 1;
            c.rel = RationalLP::Rel::Le;
            c.b = to_rat(lp.upper[j]);
            cons.push_back(std::move(c));
        }
    }

    std::vector<Rat> cvec(n);
    for (std::size_t j = 0; j < n; ++j) cvec[j] = to_rat(lp.c[j]);

    auto feasible_at = [&](const std::vector<Rat>& x) {
        for (const auto& c : cons) {
            Rat lhs(0);
            for (std::size_t j = 0; j < n; ++j) lhs += c.a[j] * x[j];
            switch (c.rel) {
                case RationalLP::Rel::Le:
                    if (lhs > c.b) return false;
                    break;
                case RationalLP::Rel::Ge:
                    if (lhs < c.b) return false;
                    break;
                case RationalLP::Rel::Eq:
                    if (lhs != c.b) return false;
                    break;
            }
        }
        return true;
    };

    RationalLPResult best;
    Rat best_obj;

    // all n-subsets of the constraint pool as candidate active sets
    const std::size_t m = cons.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    if (m < n) return best;
    while (true) {
        std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n));
        std::vector<Rat> b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = cons[idx[k]].a;
            b[k] = cons[idx[k]].b;
        }
        std::vector<Rat> x;
        if (solve_sq(std::move(a), std::move(b), x) && feasible_at(x)) {
            Rat obj(0);
            for (std::size_t j = 0; j < n; ++j) obj += cvec[j] * x[j];
            if (!best.feasible || obj < best_obj) {
                best.feasible = true;
                best_obj = obj;
                best.x.resize(n);
                for (std::size_t j = 0; j < n; ++j) best.x[j] = x[j].get_d();
            }
        }
        // next combination
        std::size_t k = n;
        bool advanced = false;
        while (k-- > 0) {
            if (idx[k] + (n - k) < m) {
                ++idx[k];
                for (std::size_t j = k + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
                advanced = true;
                break;
            }
            if (k == 0) break;
        }
        if (!advanced) break;
    }
    if (best.feasible) best.objective = best_obj.get_d();
    return best;
}

bool point_in_simplex(const sced::Vec& p, const std::vector<sced::Vec>& verts,
                      double tol) {
    const std::size_t d = p.size();
    const std::size_t k = verts.size();
    // solve sum_i t_i v_i = p, sum t_i = 1 in the least-squares sense via the
    // (d+1) x k system; accept when a solution exists with t_i >= -tol
    std::vector<std::vector<double>> a(d + 1, std::vector<double>(k + 1, 0.0));
    for (std::size_t q = 0; q < d; ++q) {
        for (std::size_t i = 0; i < k; ++i) a[q][i] = verts[i][q];
        a[q][k] = p[q];
    }
    for (std::size_t i = 0; i < k; ++i) a[d][i] = 1.0;
    a[d][k] = 1.0;

    // Gaussian elimination with partial pivoting over the k unknowns
    const std::size_t rows = d + 1;
    std::size_t r = 0;
    std::vector<std::size_t> col_of_row;
    for (std::size_t cidx = 0; cidx < k && r < rows; ++cidx) {
        std::size_t p_row = r;
        for (std::size_t i = r + 1; i < rows; ++i)
            if (std::abs(a[i][cidx]) > std::abs(a[p_row][cidx])) p_row = i;
        if (std::abs(a[p_row][cidx]) < 1e-12) continue;
        std::swap(a[r], a[p_row]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double f = a[i][cidx] / a[r][cidx];
            if (f == 0.0) continue;
            for (std::size_t j = cidx; j <= k; ++j) a[i][j] -= f * a[r][j];
        }
        col_of_row.push_back(cidx);
        ++r;
    }
    // inconsistent system -> outside the affine hull
    for (std::size_t i = r; i < rows; ++i)
        if (std::abs(a[i][k]) > tol) return false;

    std::vector<double> t(k, 0.0);
    for (std::size_t i = 0; i < r; ++i) t[col_of_row[i]] = a[i][k] / a[i][col_of_row[i]];
    for (double ti : t)
        if (ti < -tol) return false;
    return true;
}

bool on_segment_between_others(const std::vector<sced::Vec>& pts, std::size_t v,
                               double tol) {
    const std::size_t n = pts.size();
    const std::size_t d = pts[v].size();
    for (std::size_t x = 0; x < n; ++x) {
        if (x == v) continue;
        for (std::size_t y = x + 1; y < n; ++y) {
            if (y == v) continue;
            if (pts[x] == pts[y]) continue;
            // p = t*x + (1-t)*y: pick the coordinate with the largest spread
            std::size_t q0 = 0;
            double spread = 0.0;
            for (std::size_t q = 0; q < d; ++q) {
                const double s = std::abs(pts[x][q] - pts[y][q]);
                if (s > spread) {
                    spread = s;
                    q0 = q;
                }
            }
            if (spread < tol) continue;
            const double t = (pts[v][q0] - pts[y][q0]) / (pts[x][q0] - pts[y][q0]);
            if (t <= tol || t >= 1.0 - tol) continue;
            bool match = true;
            for (std::size_t q = 0; q < d; ++q) {
                const double interp = t * pts[x][q] + (1.0 - t) * pts[y][q];
                if (std::abs(interp - pts[v][q]) > tol * (1.0 + std::abs(interp))) {
                    match = false;
                    break;
                }
            }
            if (match) return true;
        }
    }
    return false;
}

std::vector<std::size_t> brute_extreme_points(const std::vector<sced::Vec>& pts,
                                              std::size_t dim) {
    if (dim > 3) throw std::runtime_error("brute_extreme_points supports dim <= 3");
    const std::size_t n = pts.size();
    std::vector<std::size_t> extreme;
    constexpr double tol = 1e-9;

    for (std::size_t v = 0; v < n; ++v) {
        bool inside = false;
        // duplicates: a later copy of an identical point is not extreme
        for (std::size_t i = 0; i < n && !inside; ++i)
            if (i != v && i < v && pts[i] == pts[v]) inside = true;
        if (!inside && on_segment_between_others(pts, v, tol)) inside = true;

        // Caratheodory: any non-extreme point lies in the hull of some subset
        // of size <= dim+1 of the others (sizes 3..dim+1 here; size 2 is the
        // segment test above)
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < n; ++i)
            if (i != v) others.push_back(i);
        for (std::size_t kk = 3; kk <= dim + 1 && !inside; ++kk) {
            if (others.size() < kk) break;
            std::vector<std::size_t> idx(kk);
            for (std::size_t k = 0; k < kk; ++k) idx[k] = k;
            while (!inside) {
                std::vector<sced::Vec> verts;
                verts.reserve(kk);
                for (std::size_t k = 0; k < kk; ++k) verts.push_back(pts[others[idx[k]]]);
                if (point_in_simplex(pts[v], verts, tol)) inside = true;
                std::size_t k = kk;
                bool adv = false;
                while (k-- > 0) {
                    if (idx[k] + (kk - k) < others.size()) {
                        ++idx[k];
                        for (std::size_t j = k + 1; j < kk; ++j) idx[j] = idx[j - 1] + 1;
                        adv = true;
                        break;
                    }
                    if (k == 0) break;
                }
                if (!adv) break;
            }
        }
        if (!inside) extreme.push_back(v);
    }
    return extreme;
}

}  // namespace oracle
