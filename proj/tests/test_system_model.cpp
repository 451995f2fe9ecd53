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
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sparseobs/stochastic.hpp"
#include "sparseobs/system_model.hpp"

namespace sparseobs {
namespace {

Matrix naive_power(const Matrix& A, int t) {
    Matrix R = Matrix::Identity(A.rows(), A.cols());
    for (int i = 0; i < t; ++i) R = R * A;
    return R;
}

TEST(DiagonalSystem, BuildsDiagAndRow) {
    const std::vector<double> lam{1, 2, 3}, c{1, 1, 1};
    const LtiSystem sys = make_diagonal_system(lam, c);
    EXPECT_EQ(sys.A(), Matrix(Vector::LinSpaced(3, 1, 3).asDiagonal()));
    EXPECT_EQ(sys.C(), Matrix::Ones(1, 3));
    EXPECT_EQ(sys.B(), Matrix::Identity(3, 3));
    EXPECT_EQ(sys.d_y(), 1);
}

TEST(DiagonalSystem, RejectsZeroEigenvalue) {
    const std::vector<double> lam{1, 0, 3}, c{1, 1, 1};
    try {
        make_diagonal_system(lam, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroEigenvalue);
    }
}

TEST(DiagonalSystem, RejectsZeroObservationEntry) {
    const std::vector<double> lam{1, 2}, c{1, 0};
    try {
        make_diagonal_system(lam, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroObservationEntry);
    }
}

TEST(DiagonalSystem, DuplicateOnlyInStrictMode) {
    const std::vector<double> lam{2, 2}, c{1, 1};
    EXPECT_NO_THROW(make_diagonal_system(lam, c));
    try {
        make_diagonal_system(lam, c, true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateEigenvalue);
    }
}

TEST(DiagonalSystem, ObservabilityIsVandermondeTimesDiagC) {
    const std::vector<double> lam{0.5, -1.5, 2.0, -3.0}, c{2, 1, -1, 1};
    const LtiSystem sys = make_diagonal_system(lam, c);
    const Matrix O = observability_matrix(sys, ObservationSchedule::successive(3));
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j)
            EXPECT_DOUBLE_EQ(O(i, j), c[j] * std::pow(lam[j], static_cast<double>(i)));
}

TEST(JordanSystem, SingleBlock) {
    const JordanSpec spec{{{2.0, 3}}};
    const std::vector<double> c{1, 0, 0};
    const LtiSystem sys = make_jordan_system(spec, c);
    Matrix expect(3, 3);
    expect << 2, 1, 0, 0, 2, 1, 0, 0, 2;
    EXPECT_EQ(sys.A(), expect);
}

TEST(JordanSystem, RejectsZeroLeadingEntry) {
    const JordanSpec spec{{{2.0, 2}, {5.0, 1}}};
    const std::vector<double> c{0, 1, 1};
    try {
        make_jordan_system(spec, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroLeadingEntry);
    }
}

TEST(JordanSystem, PowersCarryBinomialTerms) {
    const double lam = 1.3;
    const JordanSpec spec{{{lam, 3}}};
    const std::vector<double> c{1, 0, 0};
    const LtiSystem sys = make_jordan_system(spec, c);
    for (int t = 2; t <= 12; ++t) {
        const Matrix P = matrix_power(sys.A(), t);
        EXPECT_NEAR(P(0, 0), std::pow(lam, t), 1e-12 * std::pow(lam, t));
        EXPECT_NEAR(P(0, 1), t * std::pow(lam, t - 1), 1e-12 * t * std::pow(lam, t));
        EXPECT_NEAR(P(0, 2), 0.5 * t * (t - 1) * std::pow(lam, t - 2), 1e-12 * t * t * std::pow(lam, t));
    }
}

TEST(MatrixPower, ZeroExponentIsIdentity) {
    Rng rng(3);
    const Matrix A = sample_gaussian(4, 4, rng);
    EXPECT_EQ(matrix_power(A, 0), Matrix::Identity(4, 4));
}

TEST(MatrixPower, Diagonal) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 2;
    A(1, 1) = 3;
    const Matrix P = matrix_power(A, 4);
    EXPECT_DOUBLE_EQ(P(0, 0), 16);
    EXPECT_DOUBLE_EQ(P(1, 1), 81);
    EXPECT_DOUBLE_EQ(P(0, 1), 0);
}

TEST(MatrixPower, JordanCornerMatchesRepeatedMultiplication) {
    Matrix J(3, 3);
    J << 2, 1, 0, 0, 2, 1, 0, 0, 2;
    const Matrix P = matrix_power(J, 5);
    EXPECT_DOUBLE_EQ(P(0, 2), 80.0);
    EXPECT_TRUE(P.isApprox(naive_power(J, 5), 1e-14));
}

TEST(MatrixPower, RejectsNonSquare) {
    try {
        matrix_power(Matrix(Matrix::Ones(2, 3)), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonSquare);
    }
}

TEST(MatrixPower, Homomorphism) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix A = sample_gaussian(5, 5, rng) / 3.0;
        const int s = static_cast<int>(rng.below(8)), t = static_cast<int>(rng.below(8));
        const Matrix lhs = matrix_power(A, s + t);
        const Matrix rhs = matrix_power(A, s) * matrix_power(A, t);
        EXPECT_LE((lhs - rhs).norm(), 1e-9 * (1.0 + lhs.norm()));
        EXPECT_LE((lhs - naive_power(A, s + t)).norm(), 1e-9 * (1.0 + lhs.norm()));
    }
}

TEST(ObservabilityMatrix, FirstBlockIsC) {
    Rng rng(5);
    const LtiSystem sys(sample_gaussian(4, 4, rng), sample_gaussian(2, 4, rng));
    EXPECT_EQ(observability_matrix(sys, ObservationSchedule({0})), sys.C());
}

TEST(ObservabilityMatrix, HandExpansion) {
    const std::vector<double> lam{1, 2}, c{1, 1};
    const Matrix O = observability_matrix(make_diagonal_system(lam, c), ObservationSchedule::successive(3));
    Matrix expect(3, 2);
    expect << 1, 1, 1, 2, 1, 4;
    EXPECT_EQ(O, expect);
}

TEST(ObservabilityMatrix, SquareInvertibleRecoversAnyState) {
    Rng rng(8);
    const LtiSystem sys(sample_gaussian(4, 4, rng) / 2.0, sample_gaussian(1, 4, rng));
    const ObservationSchedule sched = ObservationSchedule::successive(4);
    const Matrix O = observability_matrix(sys, sched);
    const Vector x0 = sample_gaussian(4, 1, rng);
    const Vector y = simulate_outputs(sys, x0, sched);
    EXPECT_LE((O.fullPivLu().solve(y) - x0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ObservabilityMatrix, StackingConsistency) {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const LtiSystem sys(sample_gaussian(5, 5, rng) / 2.5, sample_gaussian(2, 5, rng));
        const ObservationSchedule full({0, 2, 3, 7, 9, 12});
        const ObservationSchedule a({0, 2, 3}), b({7, 9, 12});
        Matrix stacked(12, 5);
        stacked << observability_matrix(sys, a), observability_matrix(sys, b);
        EXPECT_LE((stacked - observability_matrix(sys, full)).norm(), 1e-12 * (1.0 + stacked.norm()));
    }
}

TEST(ObservabilityMatrix, MatchesPerRowPowers) {
    Rng rng(22);
    const LtiSystem sys(sample_gaussian(4, 4, rng) / 2.0, sample_gaussian(1, 4, rng));
    const ObservationSchedule sched({1, 4, 5, 11});
    const Matrix O = observability_matrix(sys, sched);
    for (Index i = 0; i < sched.m(); ++i) {
        const Matrix row = sys.C() * naive_power(sys.A(), static_cast<int>(sched.times()[i]));
        EXPECT_LE((O.row(i) - row).norm(), 1e-10 * (1.0 + row.norm()));
    }
}

TEST(ObservabilityMatrix, DiagonalFactorization) {
    const std::vector<double> lam{0.4, 1.1, -0.7, 1.9}, c{1.5, -0.5, 2.0, 0.8};
    const ObservationSchedule sched({0, 3, 4, 8});
    const Matrix O = observability_matrix(make_diagonal_system(lam, c), sched);
    const Matrix V = vandermonde(lam, sched);
    const Eigen::Map<const Vector> cv(c.data(), 4);
    EXPECT_LE((O - V * cv.asDiagonal()).norm(), 1e-12 * O.norm());
}

TEST(ObservabilityMatrix, ExtendedPrecisionAgrees) {
    Rng rng(4);
    const LtiSystem sys(sample_gaussian(4, 4, rng) / 2.0, sample_gaussian(1, 4, rng));
    const ObservationSchedule sched = ObservationSchedule::successive(6);
    const Matrix Od = observability_matrix(sys, sched);
    const Matrix Ol = observability_matrix<long double>(sys, sched).cast<double>();
    EXPECT_LE((Od - Ol).norm(), 1e-12 * Od.norm());
}

TEST(SimulateOutputs, ZeroState) {
    Rng rng(1);
    const LtiSystem sys(sample_gaussian(3, 3, rng), sample_gaussian(1, 3, rng));
    EXPECT_EQ(simulate_outputs(sys, Vector::Zero(3), ObservationSchedule::successive(4)), Vector::Zero(4));
}

TEST(SimulateOutputs, GeometricSequence) {
    const std::vector<double> lam{1, 2, 3}, c{1, 1, 1};
    const Vector y = simulate_outputs(make_diagonal_system(lam, c), SparseVector::unit(3, 1, 5.0),
                                      ObservationSchedule::successive(3));
    EXPECT_EQ(y, Vector::LinSpaced(3, 0, 2).unaryExpr([](double t) { return 5.0 * std::pow(2.0, t); }));
}

TEST(SimulateOutputs, UnitVectorPicksColumn) {
    Rng rng(2);
    const LtiSystem sys(sample_gaussian(4, 4, rng) / 2.0, sample_gaussian(2, 4, rng));
    const ObservationSchedule sched({6});
    const Matrix CAt = sys.C() * matrix_power(sys.A(), 6);
    for (Index j = 0; j < 4; ++j) {
        const Vector y = simulate_outputs(sys, SparseVector::unit(4, j), sched);
        EXPECT_LE((y - CAt.col(j)).norm(), 1e-12 * (1.0 + CAt.norm()));
    }
}

TEST(SimulateOutputs, MatchesObservabilityProduct) {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const LtiSystem sys(sample_gaussian(6, 6, rng) / 3.0, sample_gaussian(2, 6, rng));
        const ObservationSchedule sched({0, 1, 5, 6, 10});
        const Vector x0 = sample_gaussian(6, 1, rng);
        const Vector y = simulate_outputs(sys, x0, sched);
        const Vector ref = observability_matrix(sys, sched) * x0;
        EXPECT_LE((y - ref).norm(), 1e-10 * (1.0 + ref.norm()));
    }
}

TEST(SimulateOutputs, Linearity) {
    Rng rng(10);
    const LtiSystem sys(sample_gaussian(5, 5, rng) / 2.5, sample_gaussian(1, 5, rng));
    const ObservationSchedule sched({0, 2, 3, 9});
    const Vector x = sample_gaussian(5, 1, rng), xp = sample_gaussian(5, 1, rng);
    const double a = 1.7, b = -0.3;
    const Vector lhs = simulate_outputs(sys, Vector(a * x + b * xp), sched);
    const Vector rhs = a * simulate_outputs(sys, x, sched) + b * simulate_outputs(sys, xp, sched);
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
}

TEST(SimulateOutputs, DimensionMismatch) {
    const std::vector<double> lam{1, 2}, c{1, 1};
    try {
        simulate_outputs(make_diagonal_system(lam, c), Vector::Ones(3), ObservationSchedule({0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(LtiSystem, RejectsNonOrthonormalBasis) {
    Matrix B = Matrix::Identity(2, 2);
    B(0, 1) = 1e-3;
    try {
        LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(1, 2), B);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonOrthonormalBasis);
    }
}

TEST(LtiSystem, AcceptsRotationBasis) {
    Rng rng(12);
    const Matrix Q = sample_stiefel(4, 4, rng);
    const LtiSystem sys(Matrix::Identity(4, 4), Matrix::Ones(1, 4), Q);
    EXPECT_LE((sys.B().transpose() * sys.B() - Matrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(LtiSystem, RejectsInconsistentShapes) {
    EXPECT_THROW(LtiSystem(Matrix::Ones(2, 3), Matrix::Ones(1, 3)), Error);
    EXPECT_THROW(LtiSystem(Matrix::Identity(3, 3), Matrix::Ones(1, 2)), Error);
}

TEST(Schedule, RejectsUnsortedDuplicateAndNegative) {
    for (const std::vector<std::int64_t>& t : {std::vector<std::int64_t>{2, 1}, {1, 1}, {-1, 0}, {}}) {
        try {
            ObservationSchedule s(t);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidSchedule);
        }
    }
}

TEST(Schedule, Successive) {
    const ObservationSchedule s = ObservationSchedule::successive(4, 3);
    EXPECT_EQ(s.times(), (std::vector<std::int64_t>{3, 4, 5, 6}));
}

TEST(SparseVector, InvariantsHold) {
    const SparseVector v(6, {{4, 2.0}, {1, -1.0}, {3, 0.0}});
    EXPECT_EQ(v.k(), 2);
    EXPECT_EQ(v.support(), (std::vector<Index>{1, 4}));
    EXPECT_EQ(v[4], 2.0);
    EXPECT_EQ(v[3], 0.0);
    EXPECT_THROW(SparseVector(3, {{3, 1.0}}), Error);
    EXPECT_THROW(SparseVector(3, {{1, 1.0}, {1, 2.0}}), Error);
}

}  // namespace
}  // namespace sparseobs
