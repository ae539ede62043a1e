#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "lcks/dual.hpp"
#include "lcks/errors.hpp"

namespace lcks {

inline constexpr double kRankRelTol = 1e-10;  // singular values below tol * s_max count as zero

// minimum-norm least-squares solution of A x = b
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol = kRankRelTol);

// orthonormal basis of ker A as columns (possibly 0 columns)
Eigen::MatrixXd kernel_basis_of(const Eigen::MatrixXd& A, double rel_tol = kRankRelTol);

// Dense linear solve over a generic scalar (doubles or nested duals), partial
// pivoting by the magnitude of the value part.  Used to differentiate through
// pointwise solves.
template <class T>
std::vector<T> solve_dense(std::vector<std::vector<T>> M, std::vector<T> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(value_of(M[col][col]));
        for (std::size_t r = col + 1; r < n; ++r) {
            double m = std::abs(value_of(M[r][col]));
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (best == 0.0) throw Inconsistent(0.0);
        if (piv != col) {
            std::swap(M[piv], M[col]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            T f = M[r][col] / M[col][col];
            for (std::size_t c = col; c < n; ++c) M[r][c] = M[r][c] - f * M[col][c];
            b[r] = b[r] - f * b[col];
        }
    }
    std::vector<T> x(n, T(0.0));
    for (std::size_t ri = n; ri-- > 0;) {
        T acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc = acc - M[ri][c] * x[c];
        x[ri] = acc / M[ri][ri];
    }
    return x;
}

// minimum-norm solution of B x = rhs for full-row-rank B, via normal equations
// in generic scalar arithmetic: x = B^T (B B^T)^{-1} rhs
template <class T>
std::vector<T> min_norm_normal_equations(const std::vector<std::vector<T>>& B, const std::vector<T>& rhs) {
    const std::size_t rows = B.size();
    const std::size_t cols = rows ? B[0].size() : 0;
    std::vector<std::vector<T>> M(rows, std::vector<T>(rows, T(0.0)));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < rows; ++j) {
            T acc(0.0);
            for (std::size_t c = 0; c < cols; ++c) acc = acc + B[i][c] * B[j][c];
            M[i][j] = acc;
        }
    std::vector<T> y = solve_dense(std::move(M), rhs);
    std::vector<T> x(cols, T(0.0));
    for (std::size_t c = 0; c < cols; ++c) {
        T acc(0.0);
        for (std::size_t r = 0; r < rows; ++r) acc = acc + B[r][c] * y[r];
        x[c] = acc;
    }
    return x;
}

}  // namespace lcks
