#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "sced/lp.hpp"

namespace sced {

enum class CertificateKind { Solution, Compression, Classical };

const char* to_string(CertificateKind k);

/// Distribution-free risk interval at confidence 1 - beta: with probability
/// at least 1 - beta over the N-sample draw, the true violation (or
/// compression) probability lies in [eps_lower, eps_upper].
struct RiskCertificate {
    CertificateKind kind = CertificateKind::Solution;
    std::size_t k = 0;  // complexity the bound was evaluated at
    std::size_t n = 0;  // scenario count
    double beta = 0.0;
    double eps_lower = 0.0;
    double eps_upper = 0.0;
};

struct ComplexityReport {
    std::size_t complexity = 0;  // s_N*, the number of support scenarios
    std::vector<int> support_scenarios;
    std::size_t solves_used = 0;
    bool degenerate_warning = false;
};

/// The confidence function whose unit level set yields the risk bound roots:
/// two sums of binomial ratios times powers of (1 - alpha), evaluated in log
/// space (the ratios overflow doubles long before N = 500). Domain alpha < 1;
/// k = N drops the first sum.
double psi(std::size_t k, double beta, double alpha, std::size_t n);
double log_psi(std::size_t k, double beta, double alpha, std::size_t n);

/// The two roots of psi = 1 turned into the risk interval:
/// eps_lower = max(0, smaller root), eps_upper = larger root (1 when k = N).
/// Roots are located by a geometric sign scan plus bisection to 1e-9.
/// Throws RootBracketFailure if the expected sign structure is not found.
std::pair<double, double> epsilon_bounds(std::size_t k, std::size_t n, double beta);

/// Smallest eps whose binomial lower tail of order h is at most beta
/// (the classical a-priori bound). h = 1 reduces to 1 - beta^(1/N).
double classical_epsilon(std::size_t n, std::size_t h, double beta);

/// Re-solves the program with one scenario group excluded (and possibly a set
/// of them, for the degeneracy probe). Supplied by the dispatch layer so the
/// probing loop stays independent of how programs are solved.
using GroupResolver = std::function<LPSolution(const std::vector<int>& excluded)>;

/// Support-scenario count by leave-one-out probing. Scenarios with no active
/// row at the base optimum are provably non-support (removing slack rows
/// cannot move an LP optimum), so only binding scenarios are re-solved.
/// A final joint probe removes every detected non-support scenario at once
/// and flags degeneracy when that changes the cost.
ComplexityReport solution_complexity(const LPProblem& program, const LPSolution& base,
                                     const GroupResolver& resolve);

/// Package epsilon_bounds with metadata. kind must be Solution or
/// Compression; classical certificates are built from classical_epsilon.
RiskCertificate certify(CertificateKind kind, std::size_t k, std::size_t n,
                        double beta);

}  // namespace sced
