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
#ifndef SPARSEOBS_RECOVERY_HPP
#define SPARSEOBS_RECOVERY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/error.hpp"
#include "sparseobs/linalg.hpp"
#include "sparseobs/lp_simplex.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

enum class RecoveryMethod { L1, SP, Prony, L0Oracle };

constexpr std::string_view to_string(RecoveryMethod m) noexcept {
    switch (m) {
    case RecoveryMethod::L1: return "l1";
    case RecoveryMethod::SP: return "sp";
    case RecoveryMethod::Prony: return "prony";
    case RecoveryMethod::L0Oracle: return "l0";
    }
    return "unknown";
}

struct RecoveryReport {
    RecoveryMethod method = RecoveryMethod::L1;
    SparseVector estimate;  // coefficients s in the sparsity basis
    Vector x0;              // B * s
    double residual_inf = 0.0;
    bool exact_constraint_satisfied = false;
    std::map<std::string, double> diagnostics;
    std::vector<double> residual_trace;  // subspace pursuit only: accepted residual 2-norms
};

/// Equality constraints count as satisfied when ||Phi s - y||_inf <= 1e-8 (1 + ||y||_inf).
inline double feasibility_tolerance(const Vector& y) { return 1e-8 * (1.0 + linalg::norm_inf(y)); }

/// Entries below 1e-8 (1 + ||v||_inf) are treated as zero when extracting a support.
inline SparseVector truncate_support(const Vector& v) {
    return SparseVector::from_dense(v, 1e-8 * (1.0 + linalg::norm_inf(v)));
}

namespace detail {

inline RecoveryReport finish_report(RecoveryMethod method, const Matrix& Phi, const Vector& y,
                                    SparseVector s) {
    RecoveryReport rep;
    rep.method = method;
    const Vector sd = s.dense();
    rep.residual_inf = y.size() ? linalg::norm_inf(Phi * sd - y) : 0.0;
    rep.exact_constraint_satisfied = rep.residual_inf <= feasibility_tolerance(y);
    rep.x0 = sd;
    rep.estimate = std::move(s);
    return rep;
}

inline void check_system(const Matrix& Phi, const Vector& y) {
    require(Phi.rows() >= 1 && Phi.cols() >= 1, ErrorCode::InvalidArgument, "empty sensing matrix");
    require(Phi.rows() == y.size(), ErrorCode::DimensionMismatch, "y length differs from rows of Phi");
}

}  // namespace detail

/// Basis pursuit min ||s||_1 s.t. Phi s = y, solved exactly as the LP over
/// (s+, s-) >= 0 with sum(s+ + s-) as objective.
inline RecoveryReport l1_recover(const Matrix& Phi, const Vector& y, const LpOptions& lp = {}) {
    detail::check_system(Phi, y);
    const Index m = Phi.rows(), n = Phi.cols();
    Matrix Aeq(m, 2 * n);
    Aeq << Phi, -Phi;
    const LpSolution sol = lp_simplex(Vector::Ones(2 * n), Aeq, y, lp);
    const Vector s = sol.x.head(n) - sol.x.tail(n);
    auto rep = detail::finish_report(RecoveryMethod::L1, Phi, y, truncate_support(s));
    rep.diagnostics["lp_pivots"] = static_cast<double>(sol.pivots);
    rep.diagnostics["lp_rows_removed"] = static_cast<double>(sol.rows_removed);
    rep.diagnostics["l1_norm"] = sol.objective;
    return rep;
}

/// Subspace pursuit with a K-sized support. Stops when the residual norm fails
/// to decrease or after 2K + 10 refinements, keeping the best iterate.
inline RecoveryReport subspace_pursuit(const Matrix& Phi, const Vector& y, Index K) {
    detail::check_system(Phi, y);
    const Index m = Phi.rows(), n = Phi.cols();
    detail::require(K >= 1 && K <= m && K <= n, ErrorCode::InvalidArgument, "SP needs 1 <= K <= min(m, n)");
    for (Index j = 0; j < n; ++j)
        detail::require(Phi.col(j).squaredNorm() > 0.0, ErrorCode::ZeroColumn, "zero column in Phi");

    bool rank_deficient = false;
    auto fit = [&](const std::vector<Index>& support, Vector& coeffs) {
        auto ls = linalg::least_squares(linalg::columns(Phi, support), y);
        rank_deficient = rank_deficient || ls.rank_deficient;
        coeffs = std::move(ls.coeffs);
        return ls.residual;
    };

    std::vector<Index> support = linalg::top_k_abs(Phi.transpose() * y, K);
    Vector coeffs;
    Vector residual = fit(support, coeffs);
    double res_norm = residual.norm();
    std::vector<double> trace{res_norm};
    const double tiny = 1e-14 * (1.0 + y.norm());

    Index iterations = 1;
    const Index cap = 2 * K + 10;
    for (Index it = 0; it < cap && res_norm > tiny; ++it) {
        std::vector<Index> cand = linalg::top_k_abs(Phi.transpose() * residual, K);
        cand.insert(cand.end(), support.begin(), support.end());
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

        Vector wide;
        fit(cand, wide);
        std::vector<Index> keep_local = linalg::top_k_abs(wide, K);
        std::vector<Index> next;
        for (Index j : keep_local) next.push_back(cand[static_cast<std::size_t>(j)]);

        Vector next_coeffs;
        Vector next_residual = fit(next, next_coeffs);
        const double next_norm = next_residual.norm();
        if (!(next_norm < res_norm)) break;
        support = std::move(next);
        coeffs = std::move(next_coeffs);
        residual = std::move(next_residual);
        res_norm = next_norm;
        trace.push_back(res_norm);
        ++iterations;
    }

    Vector s = Vector::Zero(n);
    for (std::size_t i = 0; i < support.size(); ++i) s[support[i]] = coeffs[static_cast<Index>(i)];
    auto rep = detail::finish_report(RecoveryMethod::SP, Phi, y, truncate_support(s));
    rep.residual_trace = std::move(trace);
    rep.diagnostics["sp_iterations"] = static_cast<double>(iterations);
    rep.diagnostics["rank_deficient_support"] = rank_deficient ? 1.0 : 0.0;
    return rep;
}

struct PronyOptions {
    double root_match_rel_tol = 1e-4;
    double hankel_rank_tol = 1e-10;  // relative to the largest Hankel singular value
};

/// Annihilating-filter (Prony / Reed-Solomon) decoding for A = diag(lambdas),
/// C = row(c), from samples y_t, t = t0 .. t0 + len(y) - 1, len(y) >= 2K + 1.
/// Roots of the filter polynomial are snapped to the known eigenvalue grid.
inline RecoveryReport prony_recover(std::span<const double> lambdas, std::span<const double> c,
                                    const Vector& y, Index K, std::int64_t t0 = 0,
                                    const PronyOptions& opt = {}) {
    const auto n = static_cast<Index>(lambdas.size());
    detail::require(n >= 1 && static_cast<Index>(c.size()) == n, ErrorCode::DimensionMismatch,
                    "lambdas and c must be non-empty and of equal length");
    detail::require(K >= 1, ErrorCode::InvalidArgument, "K must be positive");
    detail::require(y.size() >= 2 * K + 1, ErrorCode::InvalidArgument, "Prony needs 2K+1 samples");
    detail::require(t0 >= 0, ErrorCode::InvalidArgument, "negative start time");
    for (Index i = 0; i < n; ++i) {
        detail::require(lambdas[static_cast<std::size_t>(i)] != 0.0, ErrorCode::ZeroEigenvalue, "zero eigenvalue");
        detail::require(c[static_cast<std::size_t>(i)] != 0.0, ErrorCode::ZeroObservationEntry, "zero entry in C");
        for (Index j = 0; j < i; ++j)
            detail::require(lambdas[static_cast<std::size_t>(i)] != lambdas[static_cast<std::size_t>(j)],
                            ErrorCode::DuplicateEigenvalue, "eigenvalues must be distinct");
    }
    const Index L = y.size();

    // Full sensing matrix: O(t, i) = c_i lambda_i^{t0 + t}.
    Matrix O(L, n);
    for (Index t = 0; t < L; ++t)
        for (Index i = 0; i < n; ++i)
            O(t, i) = c[static_cast<std::size_t>(i)] *
                      std::pow(lambdas[static_cast<std::size_t>(i)], static_cast<double>(t0 + t));

    if (linalg::norm_inf(y) == 0.0) {
        auto rep = detail::finish_report(RecoveryMethod::Prony, O, y, SparseVector(n));
        rep.diagnostics["filter_order"] = 0.0;
        return rep;
    }

    Matrix H(L - K, K + 1);
    for (Index i = 0; i < H.rows(); ++i)
        for (Index j = 0; j <= K; ++j) H(i, j) = y[i + j];
    const Index hank_rank =
        std::max<Index>(1, linalg::rank_from_singular_values(linalg::singular_values(H), 1, 1,
                                                             opt.hankel_rank_tol));

    // Try the detected order first, then its neighbours, up to K.
    std::vector<Index> orders{hank_rank};
    for (Index d = 1; d <= K; ++d) {
        if (hank_rank - d >= 1) orders.push_back(hank_rank - d);
        if (hank_rank + d <= K) orders.push_back(hank_rank + d);
    }

    std::string last_failure = "no filter order matched the eigenvalue grid";
    for (Index k : orders) {
        // Monic filter: sum_{j<k} h_j y[i+j] = -y[i+k], i = 0 .. L-1-k.
        Matrix Hk(L - k, k);
        Vector rhs(L - k);
        for (Index i = 0; i < L - k; ++i) {
            for (Index j = 0; j < k; ++j) Hk(i, j) = y[i + j];
            rhs[i] = -y[i + k];
        }
        Vector scale = Hk.colwise().norm().transpose();
        for (Index j = 0; j < k; ++j) {
            if (scale[j] == 0.0) scale[j] = 1.0;
            Hk.col(j) /= scale[j];
        }
        Vector h = linalg::least_squares(Hk, rhs, 1e-13).coeffs;
        h = h.cwiseQuotient(scale);

        Matrix companion = Matrix::Zero(k, k);
        for (Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
        for (Index i = 0; i < k; ++i) companion(i, k - 1) = -h[i];
        Eigen::EigenSolver<Matrix> es(companion, false);
        if (es.info() != Eigen::Success) {
            last_failure = "companion eigenvalues did not converge";
            continue;
        }

        std::vector<Index> matched;
        bool ok = true;
        for (Index r = 0; r < k && ok; ++r) {
            const std::complex<double> root = es.eigenvalues()[r];
            Index best = -1;
            double best_d = 0.0;
            for (Index i = 0; i < n; ++i) {
                const double lam = lambdas[static_cast<std::size_t>(i)];
                const double d = std::abs(root - lam) / std::abs(lam);
                if (best < 0 || d < best_d) {
                    best = i;
                    best_d = d;
                }
            }
            if (best_d >= opt.root_match_rel_tol ||
                std::find(matched.begin(), matched.end(), best) != matched.end()) {
                ok = false;
                last_failure = "filter root does not match a distinct eigenvalue";
            } else {
                matched.push_back(best);
            }
        }
        if (!ok) continue;
        std::sort(matched.begin(), matched.end());

        // Amplitudes z_i = c_i x_i on the matched Vandermonde columns.
        Matrix V(L, k);
        for (Index t = 0; t < L; ++t)
            for (Index j = 0; j < k; ++j)
                V(t, j) = std::pow(lambdas[static_cast<std::size_t>(matched[static_cast<std::size_t>(j)])],
                                   static_cast<double>(t0 + t));
        const Vector z = linalg::least_squares(V, y, 1e-14).coeffs;
        const double zmax = linalg::norm_inf(z);
        Vector x = Vector::Zero(n);
        for (Index j = 0; j < k; ++j) {
            if (std::abs(z[j]) < 1e-8 * zmax) continue;
            const Index i = matched[static_cast<std::size_t>(j)];
            x[i] = z[j] / c[static_cast<std::size_t>(i)];
        }
        auto rep = detail::finish_report(RecoveryMethod::Prony, O, y, SparseVector::from_dense(x));
        if (!rep.exact_constraint_satisfied) {
            last_failure = "amplitude fit leaves a residual";
            continue;
        }
        rep.diagnostics["filter_order"] = static_cast<double>(k);
        rep.diagnostics["hankel_rank"] = static_cast<double>(hank_rank);
        return rep;
    }
    throw Error(ErrorCode::RootMatchFailure, last_failure);
}

/// Exhaustive sparsest-solution search: smallest k, then the lexicographically
/// first support whose least-squares residual is <= 1e-8 (1 + ||y||_2).
inline RecoveryReport l0_oracle(const Matrix& Phi, const Vector& y, Index Kmax) {
    detail::check_system(Phi, y);
    const Index n = Phi.cols();
    detail::require(Kmax >= 1, ErrorCode::InvalidArgument, "Kmax must be positive");
    detail::require(n <= 24 && Kmax <= 4, ErrorCode::SizeGuardExceeded, "l0 oracle limited to n <= 24, K <= 4");
    const double tol = 1e-8 * (1.0 + y.norm());

    if (y.norm() <= tol) {
        auto rep = detail::finish_report(RecoveryMethod::L0Oracle, Phi, y, SparseVector(n));
        rep.diagnostics["k"] = 0.0;
        return rep;
    }
    for (Index k = 1; k <= std::min(Kmax, n); ++k) {
        std::optional<Vector> found;
        linalg::for_each_combination(n, k, [&](std::span<const Index> supp) {
            const auto ls = linalg::least_squares(linalg::columns(Phi, supp), y);
            if (ls.residual.norm() > tol) return true;
            Vector s = Vector::Zero(n);
            for (std::size_t i = 0; i < supp.size(); ++i) s[supp[i]] = ls.coeffs[static_cast<Index>(i)];
            found = std::move(s);
            return false;
        });
        if (found) {
            auto rep = detail::finish_report(RecoveryMethod::L0Oracle, Phi, y, SparseVector::from_dense(*found));
            rep.diagnostics["k"] = static_cast<double>(k);
            return rep;
        }
    }
    throw Error(ErrorCode::NoSparseSolution, "no solution with at most Kmax nonzeros");
}

/// Reduction O = U diag(sigma) V^T  =>  diag(sigma)^{-1} (U^T y)_{1..r} = [I_r 0] V^T B s.
struct ReducedSystem {
    Index r = 0;
    Vector sigma;           // r positive singular values, nonincreasing
    Vector reduced_rhs;     // length r
    Matrix reduced_matrix;  // r x n, orthonormal rows
    Vector trailing;        // (U^T y)_{r+1..}: carries no information about x0
};

struct ReduceOptions {
    double rank_eps = linalg::kRankEps;  // sigma_i counts when > rank_eps * sigma_1 * max(rows, n)
    double consistency_tol = 1e-8;       // max |(U^T y)_{r+1..}| allowed, relative to ||y||_2
};

/// Singular vectors are sign-normalised so the largest-magnitude entry of each
/// right singular vector is positive; the reduction is then a function of the
/// row space and the data alone. The decomposition runs in `Scalar`; the
/// reduced system is returned in double.
template <typename Scalar>
ReducedSystem svd_reduce(const MatrixT<Scalar>& O, const VectorT<Scalar>& y, const Matrix& B,
                         const ReduceOptions& opt = {}) {
    detail::require(O.rows() >= 1 && O.cols() >= 1, ErrorCode::InvalidArgument, "empty observability matrix");
    detail::require(O.rows() == y.size(), ErrorCode::DimensionMismatch, "y length differs from rows of O");
    detail::require(B.rows() == O.cols() && B.cols() == O.cols(), ErrorCode::DimensionMismatch, "B must be n x n");

    Eigen::JacobiSVD<MatrixT<Scalar>> svd(O, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues().template cast<double>();
    ReducedSystem red;
    red.r = linalg::rank_from_singular_values(sv, O.rows(), O.cols(), opt.rank_eps);
    MatrixT<Scalar> U = svd.matrixU();
    MatrixT<Scalar> V = svd.matrixV();
    for (Index i = 0; i < red.r; ++i) {
        Index arg = 0;
        V.col(i).cwiseAbs().maxCoeff(&arg);
        if (V(arg, i) < Scalar(0)) {
            V.col(i) = -V.col(i);
            U.col(i) = -U.col(i);
        }
    }
    const VectorT<Scalar> w = U.transpose() * y;
    const double ynorm = static_cast<double>(y.norm());
    red.trailing = w.tail(O.rows() - red.r).template cast<double>();
    if (red.r == 0) {
        detail::require(ynorm == 0.0, ErrorCode::ZeroMatrix, "O is numerically zero but y is not");
        red.reduced_matrix = Matrix(0, O.cols());
        return red;
    }
    detail::require(red.trailing.size() == 0 || linalg::norm_inf(red.trailing) <= opt.consistency_tol * ynorm,
                    ErrorCode::Infeasible, "y has energy outside the range of O");
    red.sigma = sv.head(red.r);
    red.reduced_rhs =
        w.head(red.r).cwiseQuotient(svd.singularValues().head(red.r)).template cast<double>();
    red.reduced_matrix = (V.leftCols(red.r).transpose() * B.template cast<Scalar>()).template cast<double>();
    return red;
}

/// svd_reduce followed by l1_recover on the reduced system; x0 = B s.
template <typename Scalar>
RecoveryReport recover_via_reduction(const MatrixT<Scalar>& O, const VectorT<Scalar>& y, const Matrix& B,
                                     const ReduceOptions& reduce = {}, const LpOptions& lp = {}) {
    const ReducedSystem red = svd_reduce(O, y, B, reduce);
    const Matrix Phi = O.template cast<double>() * B;
    const Vector yd = y.template cast<double>();
    RecoveryReport rep;
    if (red.r == 0) {
        rep = detail::finish_report(RecoveryMethod::L1, Phi, yd, SparseVector(O.cols()));
    } else {
        const RecoveryReport inner = l1_recover(red.reduced_matrix, red.reduced_rhs, lp);
        rep = detail::finish_report(RecoveryMethod::L1, Phi, yd, inner.estimate);
        rep.diagnostics = inner.diagnostics;
    }
    rep.x0 = B * rep.estimate.dense();
    rep.diagnostics["rank"] = static_cast<double>(red.r);
    return rep;
}

}  // namespace sparseobs

#endif  // SPARSEOBS_RECOVERY_HPP
