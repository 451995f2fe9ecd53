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
#ifndef SPARSEOBS_SYSTEM_MODEL_HPP
#define SPARSEOBS_SYSTEM_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparseobs/error.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

/// Discrete-time LTI pair x_{t+1} = A x_t, y_t = C x_t with a sparsity basis B.
class LtiSystem {
public:
    static constexpr double kOrthonormalTol = 1e-10;

    /// B defaults to the identity.
    LtiSystem(Matrix A, Matrix C, std::optional<Matrix> B = std::nullopt)
        : A_(std::move(A)), C_(std::move(C)) {
        detail::require(A_.rows() >= 1 && A_.rows() == A_.cols(), ErrorCode::NonSquare,
                        "A must be square and non-empty");
        detail::require(C_.rows() >= 1 && C_.cols() == A_.rows(), ErrorCode::DimensionMismatch,
                        "C must be d_y x n");
        if (B) {
            detail::require(B->rows() == n() && B->cols() == n(), ErrorCode::DimensionMismatch,
                            "B must be n x n");
            const double err =
                (B->transpose() * *B - Matrix::Identity(n(), n())).norm();
            detail::require(err <= kOrthonormalTol, ErrorCode::NonOrthonormalBasis,
                            "B^T B deviates from identity");
            B_ = std::move(*B);
        } else {
            B_ = Matrix::Identity(n(), n());
        }
    }

    const Matrix& A() const noexcept { return A_; }
    const Matrix& C() const noexcept { return C_; }
    const Matrix& B() const noexcept { return B_; }
    Index n() const noexcept { return A_.rows(); }
    Index d_y() const noexcept { return C_.rows(); }

private:
    Matrix A_;
    Matrix C_;
    Matrix B_;
};

struct JordanBlock {
    double eigenvalue;
    Index size;
};

struct JordanSpec {
    std::vector<JordanBlock> blocks;

    Index total_size() const {
        Index s = 0;
        for (const auto& b : blocks) s += b.size;
        return s;
    }

    /// Nonzero eigenvalues, pairwise distinct across blocks.
    bool distinct_nonzero() const {
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (blocks[i].eigenvalue == 0.0) return false;
            for (std::size_t j = i + 1; j < blocks.size(); ++j)
                if (blocks[i].eigenvalue == blocks[j].eigenvalue) return false;
        }
        return true;
    }
};

/// A = diag(lambdas), C = row(c), B = I. With `strict_distinct`, repeated
/// eigenvalues are rejected.
inline LtiSystem make_diagonal_system(std::span<const double> lambdas, std::span<const double> c,
                                      bool strict_distinct = false) {
    detail::require(!lambdas.empty(), ErrorCode::InvalidArgument, "empty eigenvalue list");
    detail::require(lambdas.size() == c.size(), ErrorCode::DimensionMismatch,
                    "lambdas and c differ in length");
    const auto n = static_cast<Index>(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        detail::require(lambdas[i] != 0.0, ErrorCode::ZeroEigenvalue, "zero diagonal entry in A");
        detail::require(c[i] != 0.0, ErrorCode::ZeroObservationEntry, "zero entry in C");
        if (strict_distinct)
            for (std::size_t j = 0; j < i; ++j)
                detail::require(lambdas[j] != lambdas[i], ErrorCode::DuplicateEigenvalue,
                                "repeated diagonal entry in A");
    }
    Matrix A = Matrix::Zero(n, n);
    Matrix C(1, n);
    for (Index i = 0; i < n; ++i) {
        A(i, i) = lambdas[static_cast<std::size_t>(i)];
        C(0, i) = c[static_cast<std::size_t>(i)];
    }
    return LtiSystem(std::move(A), std::move(C));
}

/// Block-diagonal Jordan A (ones on the superdiagonal inside each block), C = row(c).
inline LtiSystem make_jordan_system(const JordanSpec& spec, std::span<const double> c) {
    detail::require(!spec.blocks.empty(), ErrorCode::InvalidArgument, "no Jordan blocks");
    for (const auto& b : spec.blocks)
        detail::require(b.size >= 1, ErrorCode::InvalidArgument, "Jordan block size must be >= 1");
    const Index n = spec.total_size();
    detail::require(static_cast<Index>(c.size()) == n, ErrorCode::DimensionMismatch,
                    "c length differs from total block size");
    Matrix A = Matrix::Zero(n, n);
    Index off = 0;
    for (const auto& b : spec.blocks) {
        detail::require(c[static_cast<std::size_t>(off)] != 0.0, ErrorCode::ZeroLeadingEntry,
                        "C vanishes at the leading coordinate of a Jordan block");
        for (Index i = 0; i < b.size; ++i) {
            A(off + i, off + i) = b.eigenvalue;
            if (i + 1 < b.size) A(off + i, off + i + 1) = 1.0;
        }
        off += b.size;
    }
    Matrix C(1, n);
    for (Index i = 0; i < n; ++i) C(0, i) = c[static_cast<std::size_t>(i)];
    return LtiSystem(std::move(A), std::move(C));
}

/// Generalised Vandermonde matrix V(i, j) = lambda_j^{t_i}.
inline Matrix vandermonde(std::span<const double> lambdas, const ObservationSchedule& sched) {
    Matrix V(sched.m(), static_cast<Index>(lambdas.size()));
    for (Index i = 0; i < V.rows(); ++i)
        for (Index j = 0; j < V.cols(); ++j)
            V(i, j) = std::pow(lambdas[static_cast<std::size_t>(j)],
                               static_cast<double>(sched.times()[static_cast<std::size_t>(i)]));
    return V;
}

/// A^t by binary exponentiation; A^0 = I.
template <typename Scalar>
MatrixT<Scalar> matrix_power(const MatrixT<Scalar>& A, std::int64_t t) {
    detail::require(A.rows() == A.cols(), ErrorCode::NonSquare, "matrix_power needs a square matrix");
    detail::require(t >= 0, ErrorCode::InvalidArgument, "negative exponent");
    MatrixT<Scalar> result = MatrixT<Scalar>::Identity(A.rows(), A.cols());
    MatrixT<Scalar> base = A;
    while (t > 0) {
        if (t & 1) result = result * base;
        t >>= 1;
        if (t > 0) base = base * base;
    }
    return result;
}

/// Stacks C A^{t_i} in schedule order: (m d_y) x n. `Scalar` selects the
/// working precision (the system itself is stored in double).
template <typename Scalar = double>
MatrixT<Scalar> observability_matrix(const LtiSystem& sys, const ObservationSchedule& sched) {
    const Index dy = sys.d_y();
    const MatrixT<Scalar> A = sys.A().template cast<Scalar>();
    MatrixT<Scalar> O(sched.m() * dy, sys.n());
    MatrixT<Scalar> block = sys.C().template cast<Scalar>() * matrix_power(A, sched.times().front());
    O.topRows(dy) = block;
    for (Index i = 1; i < sched.m(); ++i) {
        const auto gap = sched.times()[static_cast<std::size_t>(i)] -
                         sched.times()[static_cast<std::size_t>(i - 1)];
        block = (block * matrix_power(A, gap)).eval();
        O.middleRows(i * dy, dy) = block;
    }
    return O;
}

/// Propagates the state forward and records y_t = C x_t at each scheduled time.
template <typename Scalar = double>
VectorT<Scalar> simulate_outputs(const LtiSystem& sys, const Vector& x0, const ObservationSchedule& sched) {
    detail::require(x0.size() == sys.n(), ErrorCode::DimensionMismatch, "x0 dimension differs from n");
    const Index dy = sys.d_y();
    const MatrixT<Scalar> A = sys.A().template cast<Scalar>();
    const MatrixT<Scalar> C = sys.C().template cast<Scalar>();
    VectorT<Scalar> y(sched.m() * dy);
    VectorT<Scalar> x = matrix_power(A, sched.times().front()) * x0.template cast<Scalar>();
    y.head(dy) = C * x;
    for (Index i = 1; i < sched.m(); ++i) {
        const auto gap = sched.times()[static_cast<std::size_t>(i)] -
                         sched.times()[static_cast<std::size_t>(i - 1)];
        x = (matrix_power(A, gap) * x).eval();
        y.segment(i * dy, dy) = C * x;
    }
    return y;
}

template <typename Scalar = double>
VectorT<Scalar> simulate_outputs(const LtiSystem& sys, const SparseVector& x0, const ObservationSchedule& sched) {
    detail::require(x0.dim() == sys.n(), ErrorCode::DimensionMismatch, "x0 dimension differs from n");
    return simulate_outputs<Scalar>(sys, x0.dense(), sched);
}

}  // namespace sparseobs

#endif  // SPARSEOBS_SYSTEM_MODEL_HPP
