#pragma once

#include <gsl/gsl_eigen.h>
#include <gsl/gsl_linalg.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_permutation.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes::detail {

using Matrix = std::vector<std::vector<double>>;

inline Matrix matrix_inverse(const Matrix& a) {
    const std::size_t n = a.size();
    require(n > 0, "matrix_inverse: empty matrix");
    for (const auto& row : a) require(row.size() == n, "matrix_inverse: matrix not square");
    disable_gsl_abort();
    gsl_matrix* m = gsl_matrix_alloc(n, n);
    gsl_matrix* inv = gsl_matrix_alloc(n, n);
    gsl_permutation* p = gsl_permutation_alloc(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) gsl_matrix_set(m, i, j, a[i][j]);
    int signum = 0;
    int status = gsl_linalg_LU_decomp(m, p, &signum);
    if (status == 0) status = gsl_linalg_LU_invert(m, p, inv);
    Matrix out;
    if (status == 0) {
        out.assign(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i][j] = gsl_matrix_get(inv, i, j);
    }
    gsl_permutation_free(p);
    gsl_matrix_free(inv);
    gsl_matrix_free(m);
    if (status != 0) throw NumericalError("matrix_inverse: singular matrix");
    for (const auto& row : out)
        for (double v : row)
            if (!std::isfinite(v)) throw NumericalError("matrix_inverse: non-finite inverse entries");
    return out;
}

inline std::vector<double> symmetric_eigenvalues(const Matrix& a) {
    const std::size_t n = a.size();
    require(n > 0, "symmetric_eigenvalues: empty matrix");
    disable_gsl_abort();
    gsl_matrix* m = gsl_matrix_alloc(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) gsl_matrix_set(m, i, j, a[i][j]);
    gsl_vector* ev = gsl_vector_alloc(n);
    gsl_eigen_symm_workspace* ws = gsl_eigen_symm_alloc(n);
    int status = gsl_eigen_symm(m, ev, ws);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = gsl_vector_get(ev, i);
    gsl_eigen_symm_free(ws);
    gsl_vector_free(ev);
    gsl_matrix_free(m);
    if (status != 0) throw NumericalError("symmetric_eigenvalues: eigensolver failed");
    std::sort(out.begin(), out.end());
    return out;
}

// Condition number of D^{-1/2} A D^{-1/2}: scale-free degeneracy measure for
// information matrices. +inf when the scaled matrix is not positive definite.
inline double normalized_condition(const Matrix& a) {
    const std::size_t n = a.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i][i];
        if (!(d[i] > 0.0) || !std::isfinite(d[i])) return inf;
    }
    Matrix b(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            b[i][j] = a[i][j] / std::sqrt(d[i] * d[j]);
            if (!std::isfinite(b[i][j])) return inf;
        }
    auto ev = symmetric_eigenvalues(b);
    if (!(ev.front() > 0.0)) return inf;
    return ev.back() / ev.front();
}

}  // namespace hawkes::detail
