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
#ifndef SPARSEOBS_LP_SIMPLEX_HPP
#define SPARSEOBS_LP_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/error.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

struct LpOptions {
    double presolve_tol = 1e-10;  // relative rank threshold for dependent equality rows
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-10;
    double pivot_tol = 1e-9;
    Index max_pivots = 0;  // 0 selects 50 * (p + q)
};

struct LpSolution {
    Vector x;
    double objective = 0.0;
    Index pivots = 0;
    Index rows_removed = 0;
    std::vector<Index> basis;  // original column indices, one per retained row
};

namespace detail {

/// Dense tableau. Row `rows_` holds reduced costs; the last column holds the rhs
/// (and minus the objective in the cost row).
class SimplexTableau {
public:
    SimplexTableau(const Matrix& A, const Vector& b, Index max_pivots, double feas_tol)
        : rows_(A.rows()), vars_(A.cols()), rhs_(A.cols() + A.rows()), max_pivots_(max_pivots),
          feas_tol_(feas_tol) {
        T_ = Matrix::Zero(rows_ + 1, vars_ + rows_ + 1);
        T_.topLeftCorner(rows_, vars_) = A;
        T_.block(0, vars_, rows_, rows_).setIdentity();
        T_.block(0, rhs(), rows_, 1) = b;
        T0_ = T_.topRows(rows_);
        basis_.resize(static_cast<std::size_t>(rows_));
        for (Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = vars_ + i;
    }

    Index rhs() const { return rhs_; }
    Index rows() const { return rows_; }
    Index pivots() const { return pivots_; }
    const std::vector<Index>& basis() const { return basis_; }
    const Matrix& table() const { return T_; }

    /// Sets the cost row from per-column costs (artificial columns included).
    /// The row is rebuilt after every pivot so reduced costs do not drift.
    void set_costs(const Vector& cost) {
        cost_ = cost;
        refresh_costs();
    }

    double objective() const { return -T_(rows_, rhs()); }

    /// Bland's rule iterations over columns [0, allowed). Returns false when
    /// unbounded. A column whose positive entries are all below pivot_tol is
    /// numerically null and is passed over until the next pivot.
    bool optimize(Index allowed, double opt_tol, double pivot_tol) {
        std::vector<bool> skip(static_cast<std::size_t>(allowed), false);
        while (true) {
            Index enter = -1;
            for (Index j = 0; j < allowed; ++j)
                if (!skip[static_cast<std::size_t>(j)] && T_(rows_, j) < -opt_tol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;

            // Harris two-pass ratio test: bound the step with a small slack,
            // then take the largest pivot among rows within the bound.
            double bound = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < rows_; ++i) {
                const double a = T_(i, enter);
                if (a > pivot_tol) bound = std::min(bound, (std::max(T_(i, rhs()), 0.0) + feas_tol_) / a);
            }
            Index leave = -1;
            double best = 0.0;
            for (Index i = 0; i < rows_; ++i) {
                const double a = T_(i, enter);
                if (a <= pivot_tol || std::max(T_(i, rhs()), 0.0) / a > bound) continue;
                if (leave < 0 || a > best ||
                    (a == best && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = a;
                }
            }
            if (leave < 0) {
                if (T_.col(enter).head(rows_).maxCoeff() <= 0.0) return false;
                skip[static_cast<std::size_t>(enter)] = true;
                continue;
            }
            pivot(leave, enter);
            std::fill(skip.begin(), skip.end(), false);
        }
    }

    void pivot(Index r, Index c) {
        if (++pivots_ > max_pivots_) throw Error(ErrorCode::MaxPivotsExceeded, "simplex pivot cap reached");
        T_.row(r) /= T_(r, c);
        T_(r, c) = 1.0;
        for (Index i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = T_(i, c);
            if (f != 0.0) {
                T_.row(i) -= f * T_.row(r);
                T_(i, c) = 0.0;
            }
        }
        basis_[static_cast<std::size_t>(r)] = c;
        refactor();
        if (cost_.size() > 0) refresh_costs();
    }

    void drop_row(Index r) {
        Matrix next(T_.rows() - 1, T_.cols());
        next.topRows(r) = T_.topRows(r);
        next.bottomRows(T_.rows() - 1 - r) = T_.bottomRows(T_.rows() - 1 - r);
        T_ = std::move(next);
        basis_.erase(basis_.begin() + r);
        --rows_;
        T0_ = T_.topRows(rows_);
    }

private:
    /// Rebuilds the constraint rows as B^{-1} [A | I | b] from the initial rows.
    void refactor() {
        Matrix Bm(rows_, rows_);
        for (Index i = 0; i < rows_; ++i) Bm.col(i) = T0_.col(basis_[static_cast<std::size_t>(i)]);
        Eigen::PartialPivLU<Matrix> lu(Bm);
        T_.topRows(rows_) = lu.solve(T0_);
        for (Index i = 0; i < rows_; ++i) {
            const Index col = basis_[static_cast<std::size_t>(i)];
            T_.col(col).head(rows_).setZero();
            T_(i, col) = 1.0;
        }
    }

    void refresh_costs() {
        Vector cb(rows_);
        for (Index i = 0; i < rows_; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
        T_.row(rows_).head(rhs()) = cost_.transpose() - cb.transpose() * T_.topLeftCorner(rows_, rhs());
        T_(rows_, rhs()) = -cb.dot(T_.col(rhs()).head(rows_));
    }

    Vector cost_;
    Index rows_;
    Index vars_;
    Index rhs_;
    Index max_pivots_;
    double feas_tol_;
    Index pivots_ = 0;
    Matrix T_;
    Matrix T0_;
    std::vector<Index> basis_;
};

/// Indices of a maximal linearly independent subset of rows, ascending. Rows
/// are scaled to unit max-norm first; all-zero rows are always dropped.
inline std::vector<Index> independent_rows(const Matrix& A, double tol) {
    std::vector<Index> keep;
    if (A.rows() == 0 || A.cols() == 0) return keep;
    Matrix At = A.transpose();
    for (Index i = 0; i < At.cols(); ++i) {
        const double amax = At.col(i).cwiseAbs().maxCoeff();
        if (amax > 0.0) At.col(i) /= amax;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(At);
    qr.setThreshold(tol);
    if (qr.maxPivot() == 0.0) return keep;
    const Index rk = qr.rank();
    for (Index i = 0; i < rk; ++i) keep.push_back(qr.colsPermutation().indices()[i]);
    std::sort(keep.begin(), keep.end());
    return keep;
}

}  // namespace detail

/// min c^T x  s.t.  Aeq x = beq, x >= 0, by the two-phase dense simplex with
/// Bland's anti-cycling rule. Linearly dependent rows are removed up front; the
/// returned point is a basic feasible solution re-solved from its final basis.
inline LpSolution lp_simplex(const Vector& c, const Matrix& Aeq, const Vector& beq,
                             const LpOptions& opt = {}) {
    const Index p = c.size();
    const Index q = Aeq.rows();
    detail::require(p >= 1, ErrorCode::InvalidArgument, "LP needs at least one variable");
    detail::require(Aeq.cols() == p && beq.size() == q, ErrorCode::DimensionMismatch,
                    "LP dimensions disagree");
    const Index max_pivots = opt.max_pivots > 0 ? opt.max_pivots : 50 * (p + q);
    const double feas = opt.feasibility_tol * (1.0 + (q > 0 ? beq.cwiseAbs().maxCoeff() : 0.0));

    LpSolution sol;
    const std::vector<Index> keep = detail::independent_rows(Aeq, opt.presolve_tol);
    const Index r = static_cast<Index>(keep.size());
    sol.rows_removed = q - r;

    if (r == 0) {
        // Only trivial rows remain: x = 0 is optimal unless some cost is negative.
        for (Index j = 0; j < p; ++j)
            if (c[j] < 0.0) throw Error(ErrorCode::Unbounded, "negative cost on a free ray");
        sol.x = Vector::Zero(p);
        if (q > 0 && beq.cwiseAbs().maxCoeff() > feas)
            throw Error(ErrorCode::Infeasible, "zero rows with nonzero right-hand side");
        return sol;
    }

    // Rows are sign-flipped to b >= 0 and equilibrated to unit max-norm.
    Matrix A(r, p);
    Vector b(r);
    for (Index i = 0; i < r; ++i) {
        const Index k = keep[static_cast<std::size_t>(i)];
        const double amax = Aeq.row(k).cwiseAbs().maxCoeff();
        const double s = (beq[k] < 0.0 ? -1.0 : 1.0) / (amax > 0.0 ? amax : 1.0);
        A.row(i) = s * Aeq.row(k);
        b[i] = s * beq[k];
    }
    const double feas_scaled = opt.feasibility_tol * (1.0 + b.cwiseAbs().maxCoeff());
    const double a_scale = 1.0 + A.cwiseAbs().maxCoeff();
    const double c_scale = 1.0 + c.cwiseAbs().maxCoeff();

    detail::SimplexTableau tab(A, b, max_pivots, feas_scaled);

    // Phase 1: minimise the sum of artificials.
    Vector cost1 = Vector::Zero(p + r);
    cost1.tail(r).setOnes();
    tab.set_costs(cost1);
    if (!tab.optimize(p + r, opt.optimality_tol * a_scale, opt.pivot_tol))
        throw Error(ErrorCode::Unbounded, "phase 1 unbounded");
    if (tab.objective() > feas_scaled) throw Error(ErrorCode::Infeasible, "equality constraints are inconsistent");

    // Drive remaining artificials out of the basis.
    for (Index i = tab.rows() - 1; i >= 0; --i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < p) continue;
        Index col = -1;
        double best = opt.pivot_tol;
        for (Index j = 0; j < p; ++j)
            if (std::abs(tab.table()(i, j)) > best) {
                best = std::abs(tab.table()(i, j));
                col = j;
            }
        if (col >= 0)
            tab.pivot(i, col);
        else
            tab.drop_row(i);
    }

    // Phase 2 over the original columns only.
    Vector cost2 = Vector::Zero(p + r);
    cost2.head(p) = c;
    tab.set_costs(cost2);
    if (!tab.optimize(p, opt.optimality_tol * c_scale, opt.pivot_tol))
        throw Error(ErrorCode::Unbounded, "objective unbounded below");

    // Re-solve the basic variables from the final basis for a clean vertex.
    const auto& basis = tab.basis();
    const Index nb = static_cast<Index>(basis.size());
    Vector x_tab = Vector::Zero(p);
    for (Index i = 0; i < nb; ++i) x_tab[basis[static_cast<std::size_t>(i)]] = tab.table()(i, tab.rhs());
    Matrix Bm(r, nb);
    for (Index i = 0; i < nb; ++i) Bm.col(i) = A.col(basis[static_cast<std::size_t>(i)]);
    Vector xb = Bm.colPivHouseholderQr().solve(b);
    Vector x_ref = Vector::Zero(p);
    for (Index i = 0; i < nb; ++i) x_ref[basis[static_cast<std::size_t>(i)]] = xb[i];

    // Both candidates are projected onto x >= 0; the one with the smaller
    // residual wins, the refactored point on ties.
    auto project = [](Vector& x) {
        for (Index j = 0; j < x.size(); ++j)
            if (!(x[j] > 0.0)) x[j] = 0.0;
    };
    project(x_tab);
    project(x_ref);
    const double res_tab = (A * x_tab - b).cwiseAbs().maxCoeff();
    const double res_ref = (A * x_ref - b).cwiseAbs().maxCoeff();
    sol.x = res_ref <= res_tab ? x_ref : x_tab;

    if (q > 0 && (Aeq * sol.x - beq).cwiseAbs().maxCoeff() > 10.0 * feas)
        throw Error(ErrorCode::Infeasible, "removed rows are inconsistent with the solution");

    sol.objective = c.dot(sol.x);
    sol.pivots = tab.pivots();
    sol.basis = basis;
    return sol;
}

}  // namespace sparseobs

#endif  // SPARSEOBS_LP_SIMPLEX_HPP
