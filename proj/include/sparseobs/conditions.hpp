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
#ifndef SPARSEOBS_CONDITIONS_HPP
#define SPARSEOBS_CONDITIONS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/error.hpp"
#include "sparseobs/linalg.hpp"
#include "sparseobs/lp_simplex.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct CoherenceResult {
    double M = 0.0;
    double sparsity_bound = kInfinity;  // (1 + 1/M) / 2; +inf when M = 0
    Index i = -1, j = -1;              // first pair attaining M

    /// True when the coherence bound guarantees recovery of every K-sparse vector.
    bool admits(Index K) const { return M < 1.0 && static_cast<double>(K) <= sparsity_bound; }
};

/// Largest absolute inner product between distinct unit-normalised columns.
inline CoherenceResult mutual_coherence(const Matrix& Phi) {
    detail::require(Phi.cols() >= 1 && Phi.rows() >= 1, ErrorCode::InvalidArgument, "empty matrix");
    Matrix U = Phi;
    for (Index j = 0; j < U.cols(); ++j) {
        const double nrm = U.col(j).norm();
        detail::require(nrm > 0.0, ErrorCode::ZeroColumn, "zero column");
        U.col(j) /= nrm;
    }
    const Matrix G = U.transpose() * U;
    CoherenceResult out;
    for (Index i = 0; i < G.rows(); ++i)
        for (Index j = i + 1; j < G.cols(); ++j)
            if (out.i < 0 || std::abs(G(i, j)) > out.M) {
                out.M = std::abs(G(i, j));
                out.i = i;
                out.j = j;
            }
    out.M = std::min(out.M, 1.0);
    out.sparsity_bound = out.M > 0.0 ? 0.5 * (1.0 + 1.0 / out.M) : kInfinity;
    return out;
}

struct RipResult {
    Index K = 0;
    double delta = 0.0;
    bool exceeds_one = false;
    std::vector<Index> argmax_support;
};

/// Exact delta_K by enumerating supports. Subsets of a support give no larger
/// deviation, so only |I| = min(K, n) is visited; ties keep the
/// lexicographically first support.
inline RipResult rip_constant(const Matrix& Phi, Index K) {
    const Index n = Phi.cols();
    detail::require(K >= 1, ErrorCode::InvalidArgument, "K must be positive");
    detail::require(n <= 24 && K <= 5, ErrorCode::SizeGuardExceeded, "rip_constant needs n <= 24 and K <= 5");
    RipResult out;
    out.K = K;
    const Index k = std::min(K, n);
    bool first = true;
    linalg::for_each_combination(n, k, [&](std::span<const Index> idx) {
        const Matrix sub = linalg::columns(Phi, idx);
        const Matrix G = sub.transpose() * sub;
        Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
        const Vector& ev = es.eigenvalues();
        const double d = std::max(ev[ev.size() - 1] - 1.0, 1.0 - ev[0]);
        if (first || d > out.delta) {
            out.delta = d;
            out.argmax_support.assign(idx.begin(), idx.end());
            first = false;
        }
        return true;
    });
    out.exceeds_one = out.delta > 1.0;
    return out;
}

/// Orthonormal basis of the numerical null space (rank rule of linalg).
inline Matrix null_space_basis(const Matrix& Phi, double eps = linalg::kRankEps) {
    Eigen::JacobiSVD<Matrix> svd(Phi, Eigen::ComputeFullV);
    const Index r = linalg::rank_from_singular_values(svd.singularValues(), Phi.rows(), Phi.cols(), eps);
    return svd.matrixV().rightCols(Phi.cols() - r);
}

struct NullSpaceResult {
    Index K = 0;
    bool holds = true;
    double worst_c = kInfinity;   // 1 / max_{w, |T| = K} ||w_T||_1 / ||w_{T^c}||_1
    std::optional<Vector> witness_w;
    std::vector<Index> witness_T;
};

namespace detail {

/// max sigma^T w_T  s.t.  ||w_{T^c}||_1 <= 1, w = N z. Requires N_{T^c} to have
/// full column rank so the program is bounded. Returns (value, w).
inline std::pair<double, Vector> null_space_ratio_lp(const Matrix& N, std::span<const Index> T,
                                                     std::span<const double> sigma) {
    const Index n = N.rows(), d = N.cols();
    const Index k = static_cast<Index>(T.size());
    const Index p = n - k;
    std::vector<Index> comp;
    std::vector<bool> in_t(static_cast<std::size_t>(n), false);
    for (Index i : T) in_t[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < n; ++i)
        if (!in_t[static_cast<std::size_t>(i)]) comp.push_back(i);

    // Variables: z+ (d), z- (d), u (p), s1 (p), s2 (p), s0 (1).
    const Index nv = 2 * d + 3 * p + 1;
    Matrix Aeq = Matrix::Zero(2 * p + 1, nv);
    Vector beq = Vector::Zero(2 * p + 1);
    for (Index r = 0; r < p; ++r) {
        const auto row = N.row(comp[static_cast<std::size_t>(r)]);
        Aeq.block(r, 0, 1, d) = row;
        Aeq.block(r, d, 1, d) = -row;
        Aeq(r, 2 * d + r) = -1.0;
        Aeq(r, 2 * d + p + r) = 1.0;
        Aeq.block(p + r, 0, 1, d) = -row;
        Aeq.block(p + r, d, 1, d) = row;
        Aeq(p + r, 2 * d + r) = -1.0;
        Aeq(p + r, 2 * d + 2 * p + r) = 1.0;
    }
    Aeq.block(2 * p, 2 * d, 1, p).setOnes();
    Aeq(2 * p, nv - 1) = 1.0;
    beq[2 * p] = 1.0;

    Vector g = Vector::Zero(d);
    for (Index a = 0; a < k; ++a) g += sigma[static_cast<std::size_t>(a)] * N.row(T[static_cast<std::size_t>(a)]).transpose();
    Vector cost = Vector::Zero(nv);
    cost.head(d) = -g;
    cost.segment(d, d) = g;
    const LpSolution sol = lp_simplex(cost, Aeq, beq);
    const Vector z = sol.x.head(d) - sol.x.segment(d, d);
    return {-sol.objective, N * z};
}

}  // namespace detail

/// Null-space property at level K: c * ||w_T||_1 <= ||w_{T^c}||_1 for all null
/// vectors w and |T| = K. One LP per (T, sign pattern); patterns and their
/// negations give the same value, so the first sign is fixed to +1.
inline NullSpaceResult null_space_condition(const Matrix& Phi, Index K) {
    const Index n = Phi.cols();
    detail::require(K >= 1 && K < n, ErrorCode::InvalidArgument, "null_space_condition needs 1 <= K < n");
    detail::require(n <= 20 && K <= 3, ErrorCode::SizeGuardExceeded, "null_space_condition needs n <= 20 and K <= 3");
    NullSpaceResult out;
    out.K = K;
    const Matrix N = null_space_basis(Phi);
    if (N.cols() == 0) return out;

    double worst = 0.0;
    std::vector<double> sigma(static_cast<std::size_t>(K));
    linalg::for_each_combination(n, K, [&](std::span<const Index> T) {
        Matrix Nc(n - K, N.cols());
        for (Index i = 0, r = 0, a = 0; i < n; ++i) {
            if (a < K && T[static_cast<std::size_t>(a)] == i) {
                ++a;
                continue;
            }
            Nc.row(r++) = N.row(i);
        }
        Eigen::JacobiSVD<Matrix> svd(Nc, Eigen::ComputeFullV);
        const Index rc = linalg::rank_from_singular_values(svd.singularValues(), N.rows(), N.cols());
        if (rc < N.cols()) {
            // A null vector lives entirely on T: the ratio is unbounded.
            out.holds = false;
            out.worst_c = 0.0;
            out.witness_w = N * svd.matrixV().col(N.cols() - 1);
            out.witness_T.assign(T.begin(), T.end());
            return false;
        }
        for (Index mask = 0; mask < (Index{1} << (K - 1)); ++mask) {
            sigma[0] = 1.0;
            for (Index a = 1; a < K; ++a) sigma[static_cast<std::size_t>(a)] = (mask >> (a - 1)) & 1 ? -1.0 : 1.0;
            auto [value, w] = detail::null_space_ratio_lp(N, T, sigma);
            if (value > worst) {
                worst = value;
                out.witness_w = std::move(w);
                out.witness_T.assign(T.begin(), T.end());
            }
        }
        return true;
    });
    if (out.worst_c == 0.0) return out;
    out.worst_c = worst > 0.0 ? 1.0 / worst : kInfinity;
    out.holds = out.worst_c > 1.0;
    if (out.holds) {
        out.witness_w.reset();
        out.witness_T.clear();
    }
    return out;
}

struct HautusResult {
    bool observable = true;
    std::optional<std::complex<double>> witness;  // eigenvalue where [(lambda I - A); C] loses rank
};

/// Hautus-Rosenbrock test in complex arithmetic; rank rule as in svd_reduce.
inline HautusResult hautus_observable(const Matrix& A, const Matrix& C) {
    detail::require(A.rows() >= 1 && A.rows() == A.cols(), ErrorCode::NonSquare, "A must be square");
    detail::require(C.cols() == A.cols() && C.rows() >= 1, ErrorCode::DimensionMismatch, "C must be d_y x n");
    const Index n = A.rows();
    Eigen::EigenSolver<Matrix> es(A, false);
    detail::require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
    const Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::MatrixXcd S(n + C.rows(), n);
    S.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    HautusResult out;
    for (Index k = 0; k < n; ++k) {
        S.topRows(n) = -A.cast<std::complex<double>>();
        S.topRows(n).diagonal().array() += ev[k];
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
        if (linalg::rank_from_singular_values(svd.singularValues(), S.rows(), S.cols()) < n) {
            out.observable = false;
            out.witness = ev[k];
            return out;
        }
    }
    return out;
}

/// spark(Phi) > 2K: every 2K columns are linearly independent.
inline bool unique_k_sparse(const Matrix& Phi, Index K) {
    const Index n = Phi.cols();
    detail::require(K >= 1 && 2 * K <= n, ErrorCode::InvalidArgument, "unique_k_sparse needs 1 <= 2K <= n");
    detail::require(n <= 24 && K <= 4, ErrorCode::SizeGuardExceeded, "unique_k_sparse needs n <= 24 and K <= 4");
    if (2 * K > Phi.rows()) return false;
    return linalg::for_each_combination(n, 2 * K, [&](std::span<const Index> idx) {
        const Matrix sub = linalg::columns(Phi, idx);
        return linalg::numerical_rank(sub) == 2 * K;
    });
}

struct FuchsCertificate {
    Vector f;           // f_j = coefficient of lambda^j in P
    Vector g;           // e_1 - f
    Vector inner;       // <g, v_i> = 1 - P(lambda_i)
    bool valid = false;
};

/// Dual certificate g = e_1 - f built from P(lambda) = prod_k (lambda_{i_k} - lambda)^2,
/// so that <f, (1, lambda_i, ..., lambda_i^{m-1})> = P(lambda_i). Valid when P vanishes
/// on the support and is positive elsewhere, each to within the rounding
/// bound of the evaluation.
inline FuchsCertificate fuchs_certificate(std::span<const double> lambdas, std::span<const Index> support, Index m) {
    const auto n = static_cast<Index>(lambdas.size());
    const auto K = static_cast<Index>(support.size());
    detail::require(K >= 1, ErrorCode::InvalidArgument, "empty support");
    detail::require(m >= 2 * K + 1, ErrorCode::InvalidArgument, "fuchs_certificate needs m >= 2K + 1");
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j)
            detail::require(lambdas[static_cast<std::size_t>(i)] != lambdas[static_cast<std::size_t>(j)],
                            ErrorCode::DuplicateEigenvalue, "eigenvalues must be distinct");
    std::vector<bool> on(static_cast<std::size_t>(n), false);
    for (Index s : support) {
        detail::require(s >= 0 && s < n, ErrorCode::InvalidArgument, "support index out of range");
        detail::require(!on[static_cast<std::size_t>(s)], ErrorCode::InvalidArgument, "repeated support index");
        on[static_cast<std::size_t>(s)] = true;
    }

    using Ext = long double;
    std::vector<Ext> coef{1.0L};
    for (Index s : support) {
        const Ext r = lambdas[static_cast<std::size_t>(s)];
        for (int rep = 0; rep < 2; ++rep) {
            // multiply by (r - lambda)
            std::vector<Ext> next(coef.size() + 1, 0.0L);
            for (std::size_t j = 0; j < coef.size(); ++j) {
                next[j] += r * coef[j];
                next[j + 1] -= coef[j];
            }
            coef = std::move(next);
        }
    }

    FuchsCertificate out;
    out.f = Vector::Zero(m);
    for (std::size_t j = 0; j < coef.size(); ++j) out.f[static_cast<Index>(j)] = static_cast<double>(coef[j]);
    out.g = -out.f;
    out.g[0] += 1.0;
    out.inner.resize(n);
    out.valid = true;
    constexpr Ext eps = std::numeric_limits<Ext>::epsilon();
    for (Index i = 0; i < n; ++i) {
        const Ext lam = lambdas[static_cast<std::size_t>(i)];
        Ext p = 0.0L, bound = 0.0L, pw = 1.0L;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            p += coef[j] * pw;
            bound += std::abs(coef[j] * pw);
            pw *= lam;
        }
        const Ext tol = 64.0L * eps * static_cast<Ext>(coef.size()) * bound;
        out.inner[i] = static_cast<double>(1.0L - p);
        if (on[static_cast<std::size_t>(i)] ? std::abs(p) > tol : p <= tol) out.valid = false;
    }
    return out;
}

}  // namespace sparseobs

#endif  // SPARSEOBS_CONDITIONS_HPP
