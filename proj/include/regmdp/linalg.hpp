#pragma once

// Small dense linear algebra: LU factorization with partial pivoting.
// The models handled by this library are desk-scale (tens of states), so a
// plain row-major factorization beats any sparse machinery.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regmdp {

/// Thrown when a linear solve or an iterative scheme breaks down numerically.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace linalg {

struct LuFactorization {
    std::size_t n = 0;
    std::vector<double> lu;         // packed L (unit diagonal) and U, row-major
    std::vector<std::size_t> perm;  // row permutation
    bool singular = false;
};

inline LuFactorization lu_factor(std::size_t n, std::span<const double> a) {
    LuFactorization f;
    f.n = n;
    f.lu.assign(a.begin(), a.end());
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        f.perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(f.lu[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::abs(f.lu[i * n + k]);
            if (cand > best) {
                best = cand;
                pivot = i;
            }
        }
        if (!(best > 0.0)) {
            f.singular = true;
            return f;
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(f.lu[k * n + j], f.lu[pivot * n + j]);
            std::swap(f.perm[k], f.perm[pivot]);
        }
        const double inv_pivot = 1.0 / f.lu[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = f.lu[i * n + k] * inv_pivot;
            f.lu[i * n + k] = factor;
            for (std::size_t j = k + 1; j < n; ++j)
                f.lu[i * n + j] -= factor * f.lu[k * n + j];
        }
    }
    return f;
}

inline std::vector<double> lu_solve(const LuFactorization& f, std::span<const double> b) {
    const std::size_t n = f.n;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j)
            s -= f.lu[i * n + j] * x[j];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j)
            s -= f.lu[ii * n + j] * x[j];
        x[ii] = s / f.lu[ii * n + ii];
    }
    return x;
}

inline double inf_norm(std::size_t n, std::span<const double> a) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += std::abs(a[i * n + j]);
        best = std::max(best, row);
    }
    return best;
}

/// Infinity-norm condition number from explicit column solves. Only used on
/// failure paths, where the O(n^3) cost is irrelevant.
inline double condition_inf(std::size_t n, std::span<const double> a) {
    const LuFactorization f = lu_factor(n, a);
    if (f.singular)
        return std::numeric_limits<double>::infinity();
    std::vector<double> inv(n * n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = lu_solve(f, e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inv[i * n + j] = col[i];
    }
    return inf_norm(n, a) * inf_norm(n, inv);
}

/// Solves A x = b, throwing NumericalError when the factorization breaks down.
inline std::vector<double> solve(std::size_t n, std::span<const double> a,
                                 std::span<const double> b) {
    const LuFactorization f = lu_factor(n, a);
    if (f.singular)
        throw NumericalError("linear solve failed: singular matrix (condition estimate " +
                             std::to_string(condition_inf(n, a)) + ")");
    return lu_solve(f, b);
}

}  // namespace linalg
}  // namespace regmdp
