#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sced/errors.hpp"

namespace sced {

using Vec = std::vector<double>;

/// Dense row-major matrix. The only matrix type used across the library;
/// instances stay small (a few hundred rows/columns at desk scale).
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;  // row-major, rows*cols entries

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static DenseMatrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }

    Vec apply(const Vec& x) const;             // A*x
    DenseMatrix matmul(const DenseMatrix& b) const;
    DenseMatrix transposed() const;

    /// max_i sum_j |a_ij| (infinity norm)
    double inf_norm() const;
    /// max_ij |a_ij|
    double max_abs() const;
};

/// Partial-pivoting LU of a square matrix: P*A = L*U packed in one matrix.
struct LUFactorization {
    DenseMatrix lu;                  // unit-lower L below diagonal, U on/above
    std::vector<std::size_t> perm;   // row permutation: row i of PA is row perm[i] of A

    std::size_t order() const { return lu.rows; }
    /// Reconstruct P^T * L * U (should equal the factored input).
    DenseMatrix reconstruct() const;
};

/// Factor a square matrix with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-12 times the input's
/// infinity norm, DimensionMismatch for non-square input.
LUFactorization lu_factor(const DenseMatrix& m);

/// Solve A x = rhs from a factorization. Throws DimensionMismatch.
Vec lu_solve(const LUFactorization& f, const Vec& rhs);

/// Bisection root finding on [lo, hi]; requires a sign change at the
/// endpoints (throws NoSignChange otherwise). Shrinks the bracket below
/// tol and returns its midpoint.
double find_root_bisect(const std::function<double(double)>& f, double lo, double hi,
                        double tol);

// Log-space combinatorics. Binomial ratios in the risk bounds overflow
// native floats well before N=500 (choose(2000, k) alone does), so all
// consumers work with logarithms.

/// log C(n, k); -inf when k > n.
double log_binomial(std::size_t n, std::size_t k);

/// log(sum_i exp(xs_i)), stable for widely spread magnitudes.
/// Returns -inf for an empty span.
double log_sum_exp(std::span<const double> xs);

/// Scalar dot product (convenience used throughout).
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace sced
