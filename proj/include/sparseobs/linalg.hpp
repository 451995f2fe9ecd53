/*
 Copyright 2026 The sparseobs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef SPARSEOBS_LINALG_HPP
#define SPARSEOBS_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/types.hpp"

// Small dense kernels shared by the recovery and condition checkers.
namespace sparseobs::linalg {

/// Relative factor of the numerical-rank convention sigma_i > eps * sigma_1 * max(rows, cols).
inline constexpr double kRankEps = 1e-12;

inline double rank_threshold(double sigma_max, Index rows, Index cols, double eps = kRankEps) {
    return eps * sigma_max * static_cast<double>(std::max<Index>({rows, cols, 1}));
}

template <typename Derived>
Vector singular_values(const Eigen::MatrixBase<Derived>& M) {
    if (M.rows() == 0 || M.cols() == 0) return Vector();
    Eigen::JacobiSVD<Matrix> svd(M.derived().template cast<double>().eval());
    return svd.singularValues();
}

inline Index rank_from_singular_values(const Vector& sv, Index rows, Index cols,
                                       double eps = kRankEps) {
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    const double tol = rank_threshold(sv[0], rows, cols, eps);
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++r;
    return r;
}

template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& M, double eps = kRankEps) {
    return rank_from_singular_values(singular_values(M), M.rows(), M.cols(), eps);
}

inline Matrix columns(const Matrix& M, std::span<const Index> idx) {
    Matrix out(M.rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = M.col(idx[j]);
    return out;
}

struct LeastSquares {
    Vector coeffs;
    Vector residual;
    bool rank_deficient = false;
};

/// Minimum-norm least squares; rank decided at 1e-10 relative to the largest pivot.
inline LeastSquares least_squares(const Matrix& M, const Vector& y, double rank_tol = 1e-10) {
    LeastSquares out;
    if (M.cols() == 0) {
        out.coeffs = Vector();
        out.residual = y;
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(rank_tol);
    cod.compute(M);
    out.coeffs = cod.solve(y);
    out.residual = y - M * out.coeffs;
    out.rank_deficient = cod.rank() < M.cols();
    return out;
}

/// Visits every k-subset of {0..n-1} in lexicographic order; stops early when
/// the visitor returns false. Returns false iff stopped early.
inline bool for_each_combination(Index n, Index k,
                                 const std::function<bool(std::span<const Index>)>& visit) {
    if (k < 0 || k > n) return true;
    std::vector<Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Index{0});
    while (true) {
        if (!visit(idx)) return false;
        Index i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return true;
        ++idx[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

inline double binomial(Index n, Index k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// Indices of the k largest |v| entries; ties go to the lower index. Result sorted ascending.
inline std::vector<Index> top_k_abs(const Vector& v, Index k) {
    std::vector<Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Index{0});
    k = std::min(k, v.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        const double fa = std::abs(v[a]), fb = std::abs(v[b]);
        return fa > fb || (fa == fb && a < b);
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

inline double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace sparseobs::linalg

#endif  // SPARSEOBS_LINALG_HPP
