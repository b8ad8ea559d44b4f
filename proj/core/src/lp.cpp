#include "sced/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sced {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
}  // namespace

std::string group_label(const RowGroup& g) {
    switch (g.kind) {
        case RowGroup::Kind::Deterministic:
            return "det";
        case RowGroup::Kind::Scenario:
            return "scenario(" + std::to_string(g.index) + ")";
        case RowGroup::Kind::DualAux:
            return "dual-aux(" + std::to_string(g.index) + ")";
        case RowGroup::Kind::BoxAux:
            return "box-aux(" + std::to_string(g.index) + ")";
    }
    return "?";
}

const char* to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal:
            return "optimal";
        case LPStatus::Infeasible:
            return "infeasible";
        case LPStatus::Unbounded:
            return "unbounded";
    }
    return "?";
}

LPProblem::LPProblem(std::size_t n)
    : num_vars(n), objective(n, 0.0), lower(n, -kInf), upper(n, kInf) {}

void LPProblem::reserve_rows(std::size_t n) {
    row_coeffs.reserve(n * num_vars);
    row_rel.reserve(n);
    row_rhs.reserve(n);
    row_group.reserve(n);
}

void LPProblem::add_row(std::span<const double> coeffs, Relation rel, double rhs,
                        RowGroup g) {
    if (coeffs.size() != num_vars) throw DimensionMismatch("add_row: coefficient count");
    if (!std::isfinite(rhs)) throw ValidationError("add_row: non-finite rhs");
    row_coeffs.insert(row_coeffs.end(), coeffs.begin(), coeffs.end());
    row_rel.push_back(rel);
    row_rhs.push_back(rhs);
    row_group.push_back(g);
}

double LPProblem::row_activity(std::size_t r, const Vec& x) const {
    return dot(row(r), x);
}

double LPProblem::row_violation(std::size_t r, const Vec& x) const {
    const double a = row_activity(r, x);
    const double b = row_rhs[r];
    switch (row_rel[r]) {
        case Relation::LessEq:
            return a - b;
        case Relation::GreaterEq:
            return b - a;
        case Relation::Equal:
            return std::abs(a - b);
    }
    return 0.0;
}

bool LPProblem::row_satisfied(std::size_t r, const Vec& x, double tol_scale) const {
    const double tol = tol_scale * std::max(1.0, std::abs(row_rhs[r]));
    return row_violation(r, x) <= tol;
}

LPProblem remove_rows(const LPProblem& p, const RowGroup& group) {
    bool found = false;
    LPProblem q(p.num_vars);
    q.objective = p.objective;
    q.lower = p.lower;
    q.upper = p.upper;
    q.var_names = p.var_names;
    q.reserve_rows(p.num_rows());
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        if (p.row_group[r] == group) {
            found = true;
            continue;
        }
        q.add_row(p.row(r), p.row_rel[r], p.row_rhs[r], p.row_group[r]);
    }
    if (!found) throw UnknownGroup("remove_rows: no rows tagged " + group_label(group));
    return q;
}

void dump_lp(const LPProblem& p, std::ostream& os) {
    auto var_name = [&](std::size_t j) {
        if (j < p.var_names.size() && !p.var_names[j].empty()) return p.var_names[j];
        return "x" + std::to_string(j);
    };
    os << "min";
    bool first = true;
    for (std::size_t j = 0; j < p.num_vars; ++j) {
        if (p.objective[j] == 0.0) continue;
        os << (first ? " " : " + ") << p.objective[j] << "*" << var_name(j);
        first = false;
    }
    if (first) os << " 0";
    os << "\n";
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        os << "  [" << group_label(p.row_group[r]) << "] ";
        auto row = p.row(r);
        bool f2 = true;
        for (std::size_t j = 0; j < p.num_vars; ++j) {
            if (row[j] == 0.0) continue;
            os << (f2 ? "" : " + ") << row[j] << "*" << var_name(j);
            f2 = false;
        }
        if (f2) os << "0";
        switch (p.row_rel[r]) {
            case Relation::LessEq:
                os << " <= ";
                break;
            case Relation::Equal:
                os << " == ";
                break;
            case Relation::GreaterEq:
                os << " >= ";
                break;
        }
        os << p.row_rhs[r] << "\n";
    }
    for (std::size_t j = 0; j < p.num_vars; ++j) {
        if (p.lower[j] == -kInf && p.upper[j] == kInf) continue;
        os << "  " << p.lower[j] << " <= " << var_name(j) << " <= " << p.upper[j]
           << "\n";
    }
}

namespace {

// Internal standard-form model: all variables shifted to x' >= 0, upper
// bounds turned into extra <= rows, every row given rhs >= 0, then slacks /
// surpluses / artificials appended. Solved as a dense tableau.
class Tableau {
public:
    Tableau(const LPProblem& p, double free_shift) : p_(p) {
        n_ = p.num_vars;
        shift_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            if (std::isfinite(p.lower[j])) {
                shift_[j] = p.lower[j];
                if (std::isfinite(p.upper[j]) && p.upper[j] < p.lower[j])
                    infeasible_bounds_ = true;
            } else if (std::isfinite(p.upper[j])) {
                shift_[j] = std::min(-free_shift, p.upper[j] - free_shift);
            } else {
                shift_[j] = -free_shift;
            }
        }

        // internal rows: problem rows first, then finite upper bounds
        const std::size_t nrows = p.num_rows();
        for (std::size_t r = 0; r < nrows; ++r) {
            InternalRow row;
            row.coeffs.assign(p.row(r).begin(), p.row(r).end());
            row.rel = p.row_rel[r];
            row.rhs = p.row_rhs[r] - dot(row.coeffs, shift_);
            rows_.push_back(std::move(row));
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if (!std::isfinite(p.upper[j])) continue;
            InternalRow row;
            row.coeffs.assign(n_, 0.0);
            row.coeffs[j] = 1.0;
            row.rel = Relation::LessEq;
            row.rhs = p.upper[j] - shift_[j];
            rows_.push_back(std::move(row));
        }
        m_ = rows_.size();

        // Normalize rhs >= 0 and assign slack / artificial columns.
        std::size_t n_slack = 0, n_art = 0;
        for (auto& row : rows_) {
            if (row.rhs < 0.0) {
                for (double& v : row.coeffs) v = -v;
                row.rhs = -row.rhs;
                row.negated = true;
                if (row.rel == Relation::LessEq)
                    row.rel = Relation::GreaterEq;
                else if (row.rel == Relation::GreaterEq)
                    row.rel = Relation::LessEq;
            }
            if (row.rel != Relation::Equal) ++n_slack;
            if (row.rel != Relation::LessEq) ++n_art;
        }
        slack_base_ = n_;
        art_base_ = n_ + n_slack;
        width_ = n_ + n_slack + n_art + 1;  // +1 rhs column

        const std::size_t cells = m_ * width_;
        if (cells > 300'000'000)
            throw NumericalBreakdown(
                "solve_lp: dense tableau too large (" + std::to_string(m_) + " rows x " +
                std::to_string(width_) + " cols); reduce the row set before solving");

        for (const auto& row : rows_) max_rhs_ = std::max(max_rhs_, std::abs(row.rhs));

        t_.assign(cells, 0.0);
        basis_.assign(m_, -1);
        std::size_t s = slack_base_, a = art_base_;
        for (std::size_t i = 0; i < m_; ++i) {
            double* ti = t_.data() + i * width_;
            std::copy(rows_[i].coeffs.begin(), rows_[i].coeffs.end(), ti);
            ti[width_ - 1] = rows_[i].rhs;
            switch (rows_[i].rel) {
                case Relation::LessEq:
                    ti[s] = 1.0;
                    basis_[i] = int(s);
                    rows_[i].slack_col = int(s);
                    ++s;
                    break;
                case Relation::GreaterEq:
                    ti[s] = -1.0;
                    rows_[i].slack_col = int(s);
                    ++s;
                    ti[a] = 1.0;
                    basis_[i] = int(a);
                    ++a;
                    break;
                case Relation::Equal:
                    ti[a] = 1.0;
                    basis_[i] = int(a);
                    ++a;
                    break;
            }
        }
    }

    bool infeasible_bounds() const { return infeasible_bounds_; }
    std::size_t iterations() const { return iterations_; }

    enum class Result { Optimal, Unbounded, IterationLimit };

    LPStatus run(std::size_t max_iter) {
        if (infeasible_bounds_) return LPStatus::Infeasible;

        // Phase 1: minimize the artificial sum.
        if (art_base_ + 1 < width_) {
            Vec cost(width_ - 1, 0.0);
            for (std::size_t j = art_base_; j + 1 < width_; ++j) cost[j] = 1.0;
            build_cost_row(cost);
            if (iterate(cost, width_ - 1, max_iter) == Result::IterationLimit)
                throw NumericalBreakdown("solve_lp: phase-1 iteration limit reached");
            double art_sum = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] >= int(art_base_)) art_sum += rhs(i);
            const double feas_tol = 1e-7 * (1.0 + max_rhs_);
            if (art_sum > feas_tol) return LPStatus::Infeasible;
            drive_out_artificials();
        }

        // Phase 2: real objective over the shifted variables.
        Vec cost(width_ - 1, 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost[j] = p_.objective[j];
        build_cost_row(cost);
        const Result r = iterate(cost, art_base_, max_iter);
        if (r == Result::IterationLimit)
            throw NumericalBreakdown("solve_lp: phase-2 iteration limit reached");

        live_rows_.clear();
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) live_rows_.push_back(i);

        if (r == Result::Unbounded) return LPStatus::Unbounded;
        return LPStatus::Optimal;
    }

    Vec extract_x() const {
        Vec xprime(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0 && basis_[i] < int(n_)) xprime[basis_[i]] = rhs(i);
        Vec x(n_);
        for (std::size_t j = 0; j < n_; ++j) x[j] = xprime[j] + shift_[j];
        return x;
    }

    std::vector<int> basis_identity() const {
        std::vector<int> ids;
        ids.reserve(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const int b = basis_[i];
            if (b < 0 || b >= int(art_base_)) continue;  // dropped or artificial
            if (b < int(n_)) {
                ids.push_back(b);
            } else {
                // map slack column back to its internal row
                for (std::size_t r = 0; r < rows_.size(); ++r)
                    if (rows_[r].slack_col == b) {
                        ids.push_back(int(n_ + r));
                        break;
                    }
            }
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    /// y solving B^T y = c_B from the final basis, mapped to internal rows
    /// (zero for rows dropped as redundant), plus the dual objective
    /// y'b + c'shift. Uses the original column data, not the pivoted tableau.
    std::pair<Vec, double> duals_from_basis() const {
        const std::size_t mlive = live_rows_.size();
        DenseMatrix bt(mlive, mlive);
        Vec cb(mlive, 0.0);
        for (std::size_t k = 0; k < mlive; ++k) {
            const int col = basis_[live_rows_[k]];
            for (std::size_t i = 0; i < mlive; ++i)
                bt(k, i) = column_entry(live_rows_[i], col);
            if (col >= 0 && col < int(n_)) cb[k] = p_.objective[col];
        }
        Vec y = lu_solve(lu_factor(bt), cb);
        Vec yfull(rows_.size(), 0.0);
        double dual_obj = dot(p_.objective, shift_);
        for (std::size_t i = 0; i < mlive; ++i) {
            const auto& row = rows_[live_rows_[i]];
            dual_obj += y[i] * row.rhs;
            yfull[live_rows_[i]] = row.negated ? -y[i] : y[i];
        }
        return {std::move(yfull), dual_obj};
    }

    std::size_t problem_row_count() const { return p_.num_rows(); }

private:
    struct InternalRow {
        Vec coeffs;
        Relation rel = Relation::LessEq;
        double rhs = 0.0;
        bool negated = false;
        int slack_col = -1;
    };

    double rhs(std::size_t i) const { return t_[i * width_ + width_ - 1]; }

    double column_entry(std::size_t internal_row, int col) const {
        const auto& row = rows_[internal_row];
        if (col < int(n_)) return row.coeffs[col];
        if (col == row.slack_col) return (row.rel == Relation::GreaterEq) ? -1.0 : 1.0;
        return 0.0;
    }

    void build_cost_row(const Vec& cost) {
        z_.assign(width_, 0.0);
        for (std::size_t j = 0; j + 1 < width_; ++j) z_[j] = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const int b = basis_[i];
            if (b < 0) continue;
            const double cb = cost[b];
            if (cb == 0.0) continue;
            const double* ti = t_.data() + i * width_;
            for (std::size_t j = 0; j < width_; ++j) z_[j] -= cb * ti[j];
        }
    }

    Result iterate(const Vec& cost, std::size_t allowed_cols, std::size_t max_iter) {
        double cmax = 1.0;
        for (std::size_t j = 0; j + 1 < width_; ++j) cmax = std::max(cmax, std::abs(cost[j]));
        const double ztol = 1e-9 * cmax;

        std::vector<char> in_basis(width_ - 1, 0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) in_basis[basis_[i]] = 1;

        while (true) {
            if (iterations_ >= max_iter) return Result::IterationLimit;

            // Bland: lowest-index column with a negative reduced cost.
            int enter = -1;
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                if (in_basis[j]) continue;
                if (z_[j] < -ztol) {
                    enter = int(j);
                    break;
                }
            }
            if (enter < 0) return Result::Optimal;

            // Ratio test; ties broken by lowest basic-variable index (Bland).
            int leave_row = -1;
            double best_ratio = kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] < 0) continue;
                const double a = t_[i * width_ + enter];
                if (a <= kPivotTol) continue;
                const double ratio = std::max(rhs(i), 0.0) / a;
                if (ratio < best_ratio - 1e-12 ||
                    (std::abs(ratio - best_ratio) <= 1e-12 &&
                     (leave_row < 0 || basis_[i] < basis_[leave_row]))) {
                    best_ratio = ratio;
                    leave_row = int(i);
                }
            }
            if (leave_row < 0) return Result::Unbounded;

            pivot(std::size_t(leave_row), std::size_t(enter), in_basis);
            ++iterations_;
        }
    }

    void pivot(std::size_t prow, std::size_t pcol, std::vector<char>& in_basis) {
        double* pr = t_.data() + prow * width_;
        const double pivot_val = pr[pcol];
        if (std::abs(pivot_val) < kPivotTol)
            throw NumericalBreakdown("solve_lp: pivot collapse below 1e-11");
        const double inv = 1.0 / pivot_val;
        for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
        pr[pcol] = 1.0;

        for (std::size_t i = 0; i < m_; ++i) {
            if (i == prow) continue;
            double* ti = t_.data() + i * width_;
            const double f = ti[pcol];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) ti[j] -= f * pr[j];
            ti[pcol] = 0.0;
        }
        const double zf = z_[pcol];
        if (zf != 0.0) {
            for (std::size_t j = 0; j < width_; ++j) z_[j] -= zf * pr[j];
            z_[pcol] = 0.0;
        }
        if (basis_[prow] >= 0) in_basis[basis_[prow]] = 0;
        basis_[prow] = int(pcol);
        in_basis[pcol] = 1;
    }

    // After phase 1, pivot zero-level artificials out of the basis;
    // rows that cannot be pivoted are redundant and get parked.
    void drive_out_artificials() {
        std::vector<char> in_basis(width_ - 1, 0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) in_basis[basis_[i]] = 1;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < int(art_base_)) continue;
            double* ti = t_.data() + i * width_;
            int col = -1;
            for (std::size_t j = 0; j < art_base_; ++j) {
                if (in_basis[j]) continue;
                if (std::abs(ti[j]) > 1e-9) {
                    col = int(j);
                    break;
                }
            }
            if (col >= 0) {
                pivot(i, std::size_t(col), in_basis);
            } else {
                // redundant row: clear and exclude from further pivoting
                if (basis_[i] >= 0) in_basis[basis_[i]] = 0;
                basis_[i] = -1;
                std::fill(ti, ti + width_, 0.0);
            }
        }
        live_rows_.clear();
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) live_rows_.push_back(i);
    }

    const LPProblem& p_;
    std::size_t n_ = 0, m_ = 0, width_ = 0;
    std::size_t slack_base_ = 0, art_base_ = 0;
    std::vector<InternalRow> rows_;
    std::vector<double> t_;
    Vec z_;
    std::vector<int> basis_;
    std::vector<std::size_t> live_rows_;
    Vec shift_;
    double max_rhs_ = 0.0;
    bool infeasible_bounds_ = false;
    std::size_t iterations_ = 0;
};

}  // namespace

LPSolution solve_lp(const LPProblem& p, const SolveOptions& opts) {
    if (p.objective.size() != p.num_vars || p.lower.size() != p.num_vars ||
        p.upper.size() != p.num_vars)
        throw DimensionMismatch("solve_lp: malformed problem");

    double free_shift = opts.free_shift;
    bool has_free = false;
    for (std::size_t j = 0; j < p.num_vars; ++j)
        if (!std::isfinite(p.lower[j])) has_free = true;

    LPSolution out;
    double prev_obj = kInf;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Tableau tab(p, free_shift);
        std::size_t max_iter = opts.max_iterations;
        if (max_iter == 0) {
            const std::size_t m = p.num_rows() + p.num_vars;
            max_iter = 20000 + 40 * m * (std::size_t(1) + p.num_vars / 8);
        }
        const LPStatus status = tab.run(max_iter);
        out = LPSolution{};
        out.status = status;
        out.iterations = tab.iterations();
        if (status != LPStatus::Optimal) return out;

        out.x = tab.extract_x();
        out.objective = dot(p.objective, out.x);
        out.basis = tab.basis_identity();
        out.row_activity.resize(p.num_rows());
        for (std::size_t r = 0; r < p.num_rows(); ++r)
            out.row_activity[r] = p.row_activity(r, out.x);
        if (opts.compute_duals) {
            auto [y, dual_obj] = tab.duals_from_basis();
            y.resize(p.num_rows());
            out.dual = std::move(y);
            out.dual_objective = dual_obj;
        }

        if (!has_free) return out;
        bool pinned = false;
        for (std::size_t j = 0; j < p.num_vars; ++j) {
            if (std::isfinite(p.lower[j])) continue;
            if (out.x[j] <= -free_shift + 1e-6 * free_shift) pinned = true;
        }
        if (!pinned) return out;
        // A free variable landed on the artificial shift bound: widen and
        // retry. If the objective keeps improving with the wider shift the
        // problem is unbounded in that direction.
        if (attempt == 2) {
            if (out.objective < prev_obj - 1e-7 * (1.0 + std::abs(prev_obj)))
                out.status = LPStatus::Unbounded;
            return out;
        }
        prev_obj = out.objective;
        free_shift *= 32.0;
    }
    return out;
}

}  // namespace sced
