#include "sced/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sced {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec DenseMatrix::apply(const Vec& x) const {
    if (x.size() != cols) throw DimensionMismatch("matrix-vector size mismatch");
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* r = data.data() + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

DenseMatrix DenseMatrix::matmul(const DenseMatrix& b) const {
    if (cols != b.rows) throw DimensionMismatch("matrix-matrix size mismatch");
    DenseMatrix c(rows, b.cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            double* crow = c.data.data() + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::inf_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double DenseMatrix::max_abs() const {
    double best = 0.0;
    for (double v : data) best = std::max(best, std::abs(v));
    return best;
}

DenseMatrix LUFactorization::reconstruct() const {
    const std::size_t n = order();
    // PA = LU  =>  A = P^T L U
    DenseMatrix plu(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            const std::size_t kmax = std::min(i, j);
            for (std::size_t k = 0; k <= kmax; ++k) {
                const double lik = (k == i) ? 1.0 : lu(i, k);
                acc += lik * lu(k, j);
            }
            plu(perm[i], j) = acc;
        }
    }
    return plu;
}

LUFactorization lu_factor(const DenseMatrix& m) {
    if (m.rows != m.cols) throw DimensionMismatch("lu_factor requires a square matrix");
    const std::size_t n = m.rows;
    for (double v : m.data)
        if (!std::isfinite(v)) throw ValidationError("lu_factor: non-finite entry");

    LUFactorization f;
    f.lu = m;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

    const double pivot_floor = 1e-12 * std::max(m.inf_norm(), 1e-300);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best < pivot_floor)
            throw SingularMatrix("lu_factor: pivot " + std::to_string(k) +
                                 " below tolerance");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
            std::swap(f.perm[k], f.perm[p]);
        }
        const double pivot = f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double lik = f.lu(i, k) / pivot;
            f.lu(i, k) = lik;
            if (lik == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

Vec lu_solve(const LUFactorization& f, const Vec& rhs) {
    const std::size_t n = f.order();
    if (rhs.size() != n) throw DimensionMismatch("lu_solve rhs size mismatch");

    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
    // forward substitution (unit lower)
    for (std::size_t i = 0; i < n; ++i) {
        double acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x[j];
        x[i] = acc;
    }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * x[j];
        x[ii] = acc / f.lu(ii, ii);
    }
    return x;
}

double find_root_bisect(const std::function<double(double)>& f, double lo, double hi,
                        double tol) {
    if (!(lo < hi)) throw DomainError("find_root_bisect: lo must be < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NoSignChange("find_root_bisect: f(lo) and f(hi) agree in sign");

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // hit float resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    double m = xs[0];
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;  // all -inf, or an inf dominates
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace sced
