#include "sced/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sced/numerics.hpp"

namespace sced {

const char* to_string(CertificateKind k) {
    switch (k) {
        case CertificateKind::Solution:
            return "solution";
        case CertificateKind::Compression:
            return "compression";
        case CertificateKind::Classical:
            return "classical";
    }
    return "?";
}

namespace {

void check_psi_domain(std::size_t k, double beta, std::size_t n) {
    if (n < 1) throw DomainError("psi: need N >= 1");
    if (k > n) throw DomainError("psi: need 0 <= k <= N");
    if (!(beta > 0.0) || !(beta < 1.0)) throw DomainError("psi: beta must be in (0,1)");
}

/// Precomputed log coefficients of both sums; evaluation is then a single
/// log-sum-exp sweep per alpha.
struct PsiEvaluator {
    std::vector<double> log_coef;  // one per term
    std::vector<double> exponent;  // power of (1 - alpha) per term

    PsiEvaluator(std::size_t k, double beta, std::size_t n) {
        const double lbk = log_binomial(n, k);
        const double c1 = std::log(beta / (2.0 * double(n)));
        const double c2 = std::log(beta / (6.0 * double(n)));
        if (k < n) {
            for (std::size_t t = k; t < n; ++t) {
                log_coef.push_back(c1 + log_binomial(t, k) - lbk);
                exponent.push_back(double(t) - double(n));
            }
        }
        for (std::size_t t = n + 1; t <= 4 * n; ++t) {
            log_coef.push_back(c2 + log_binomial(t, k) - lbk);
            exponent.push_back(double(t) - double(n));
        }
    }

    double eval_log(double alpha) const {
        if (!(alpha < 1.0)) throw DomainError("psi: alpha must be < 1");
        const double l1a = std::log1p(-alpha);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < log_coef.size(); ++i)
            m = std::max(m, log_coef[i] + exponent[i] * l1a);
        if (!std::isfinite(m)) return m;
        double acc = 0.0;
        for (std::size_t i = 0; i < log_coef.size(); ++i)
            acc += std::exp(log_coef[i] + exponent[i] * l1a - m);
        return m + std::log(acc);
    }
};

}  // namespace

double log_psi(std::size_t k, double beta, double alpha, std::size_t n) {
    check_psi_domain(k, beta, n);
    return PsiEvaluator(k, beta, n).eval_log(alpha);
}

double psi(std::size_t k, double beta, double alpha, std::size_t n) {
    return std::exp(log_psi(k, beta, alpha, n));
}

std::pair<double, double> epsilon_bounds(std::size_t k, std::size_t n, double beta) {
    check_psi_domain(k, beta, n);
    const PsiEvaluator ev(k, beta, n);
    auto f = [&](double a) { return ev.eval_log(a); };  // root where psi = 1

    // Geometric scan of 1 - alpha over [1e-12, 11]: alpha runs from just
    // below 1 down to -10. psi diverges at both ends of its domain, so the
    // sign pattern is +,...,-,...,+ with exactly two crossings (one for k=N).
    constexpr int kGrid = 800;
    const double lo_log = std::log(1e-12), hi_log = std::log(11.0);
    std::vector<double> alphas(kGrid), vals(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        const double s = lo_log + (hi_log - lo_log) * double(i) / double(kGrid - 1);
        alphas[i] = 1.0 - std::exp(s);
        vals[i] = f(alphas[i]);
    }

    std::vector<std::pair<double, double>> brackets;  // (left alpha, right alpha)
    for (int i = 0; i + 1 < kGrid; ++i) {
        if ((vals[i] > 0.0) != (vals[i + 1] > 0.0)) {
            // alphas decrease with i
            brackets.emplace_back(alphas[i + 1], alphas[i]);
        }
    }

    const std::size_t expected = (k == n) ? 1 : 2;
    if (brackets.size() < expected)
        throw RootBracketFailure("epsilon_bounds: found " +
                                 std::to_string(brackets.size()) +
                                 " sign changes, expected " + std::to_string(expected));

    std::vector<double> roots;
    // leftmost and rightmost crossings; interior spurious pairs (if numeric
    // noise ever produced any) are ignored
    const auto solve = [&](std::pair<double, double> b) {
        return find_root_bisect(f, b.first, b.second, 1e-12);
    };
    roots.push_back(solve(brackets.front()));
    if (expected == 2) roots.push_back(solve(brackets.back()));
    std::sort(roots.begin(), roots.end());

    double eps_lo = std::max(0.0, roots.front());
    double eps_hi = (k == n) ? 1.0 : roots.back();
    eps_hi = std::min(1.0, std::max(eps_hi, eps_lo));
    return {eps_lo, eps_hi};
}

double classical_epsilon(std::size_t n, std::size_t h, double beta) {
    if (n < 1 || h < 1 || h > n)
        throw DomainError("classical_epsilon: need 1 <= h <= N");
    if (!(beta > 0.0) || !(beta < 1.0))
        throw DomainError("classical_epsilon: beta must be in (0,1)");

    // log of the binomial lower tail P[Bin(N, eps) <= h-1], decreasing in eps
    auto log_tail = [&](double eps) {
        std::vector<double> terms;
        terms.reserve(h);
        const double le = std::log(eps);
        const double l1e = std::log1p(-eps);
        for (std::size_t i = 0; i < h; ++i) {
            double t = log_binomial(n, i) + double(n - i) * l1e;
            if (i > 0) t += double(i) * le;
            terms.push_back(t);
        }
        return log_sum_exp(terms);
    };

    const double target = std::log(beta);
    double lo = 0.0, hi = 1.0 - 1e-16;
    // tail(0) = 1 > beta and tail(1-) -> 0 < beta, so the crossing exists
    for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (log_tail(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

ComplexityReport solution_complexity(const LPProblem& program, const LPSolution& base,
                                     const GroupResolver& resolve) {
    if (base.status != LPStatus::Optimal)
        throw RequiresOptimal("solution_complexity: base solve is not optimal");
    if (base.row_activity.size() != program.num_rows())
        throw DimensionMismatch(
            "solution_complexity: base solution lacks per-row activities");

    std::vector<int> ids;
    for (const auto& g : program.row_group)
        if (g.kind == RowGroup::Kind::Scenario) ids.push_back(g.index);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    // Candidates: scenarios with at least one active row at the base optimum.
    // Removing rows that are slack at an optimal vertex cannot change the
    // optimal value, so everything else is non-support without a re-solve.
    std::vector<int> candidates;
    {
        std::vector<char> flagged;
        std::size_t max_id = ids.empty() ? 0 : std::size_t(ids.back()) + 1;
        flagged.assign(max_id + 1, 0);
        for (std::size_t r = 0; r < program.num_rows(); ++r) {
            const RowGroup& g = program.row_group[r];
            if (g.kind != RowGroup::Kind::Scenario || g.index < 0) continue;
            if (flagged[std::size_t(g.index)]) continue;
            const double slack = -program.row_violation(r, base.x);
            const double act_tol = 1e-6 * std::max(1.0, std::abs(program.row_rhs[r]));
            if (slack <= act_tol) flagged[std::size_t(g.index)] = 1;
        }
        for (int id : ids)
            if (flagged[std::size_t(id)]) candidates.push_back(id);
    }

    ComplexityReport rep;
    const double thr = 1e-7 * std::max(1.0, std::abs(base.objective));
    for (int id : candidates) {
        const LPSolution probe = resolve({id});
        ++rep.solves_used;
        bool improved = false;
        if (probe.status == LPStatus::Unbounded)
            improved = true;
        else if (probe.status == LPStatus::Optimal)
            improved = probe.objective < base.objective - thr;
        else
            throw NumericalBreakdown(
                "solution_complexity: relaxed program became infeasible");
        if (improved) rep.support_scenarios.push_back(id);
    }
    rep.complexity = rep.support_scenarios.size();

    // Non-degeneracy probe: removing every non-support scenario at once must
    // leave the optimum untouched.
    std::vector<int> non_support;
    for (int id : ids)
        if (!std::binary_search(rep.support_scenarios.begin(),
                                rep.support_scenarios.end(), id))
            non_support.push_back(id);
    if (!non_support.empty()) {
        const LPSolution joint = resolve(non_support);
        ++rep.solves_used;
        rep.degenerate_warning = joint.status != LPStatus::Optimal ||
                                 std::abs(joint.objective - base.objective) > thr;
    }
    return rep;
}

RiskCertificate certify(CertificateKind kind, std::size_t k, std::size_t n,
                        double beta) {
    if (kind == CertificateKind::Classical)
        throw DomainError("certify: classical certificates come from classical_epsilon");
    const auto [lo, hi] = epsilon_bounds(k, n, beta);
    return {kind, k, n, beta, lo, hi};
}

}  // namespace sced
