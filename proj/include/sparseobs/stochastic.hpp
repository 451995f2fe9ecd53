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
#ifndef SPARSEOBS_STOCHASTIC_HPP
#define SPARSEOBS_STOCHASTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/error.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

///
/// Deterministic random stream.
///
/// The generator is xoshiro256** (Blackman & Vigna). A stream is identified by
/// (master seed, stream index): the four state words are the first four outputs
/// of SplitMix64 started at `mix(master ^ mix(index + 0x9E3779B97F4A7C15))`,
/// where `mix` is the SplitMix64 finaliser. Uniform doubles take the top 53
/// bits; normals use Box-Muller on two uniforms, the sine branch being cached
/// for the next call. Only integer arithmetic and `log`/`sqrt`/`cos`/`sin`
/// enter a draw, so streams are reproducible across conforming platforms.
///
class Rng {
public:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    explicit Rng(std::uint64_t master, std::uint64_t stream = 0) noexcept {
        std::uint64_t x = mix(master ^ mix(stream + 0x9E3779B97F4A7C15ULL));
        for (auto& word : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = mix(x);
        }
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        ++draws_;
        return result;
    }

    /// [0, 1)
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        detail::require(bound > 0, ErrorCode::InvalidArgument, "empty integer range");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do v = next();
        while (v >= limit);
        return v % bound;
    }

    double normal() noexcept {
        if (cached_) {
            const double z = *cached_;
            cached_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        return r * std::cos(a);
    }

    double sign() noexcept { return (next() >> 63) ? -1.0 : 1.0; }

    std::uint64_t draws() const noexcept { return draws_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
    std::uint64_t draws_ = 0;
    std::optional<double> cached_;
};

/// I.i.d. N(0, 1) entries, filled row by row.
inline Matrix sample_gaussian(Index rows, Index cols, Rng& rng) {
    detail::require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "rows and cols must be >= 1");
    Matrix G(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) G(i, j) = rng.normal();
    return G;
}

/// Isotropic (Haar) draw from the Stiefel manifold S_{n,k}: thin QR of a
/// Gaussian n x k matrix with the signs of diag(R) absorbed into Q.
inline Matrix sample_stiefel(Index n, Index k, Rng& rng) {
    detail::require(k >= 1 && k <= n, ErrorCode::InvalidArgument, "Stiefel draw needs 1 <= k <= n");
    for (int attempt = 0; attempt < 2; ++attempt) {
        const Matrix G = sample_gaussian(n, k, rng);
        Eigen::HouseholderQR<Matrix> qr(G);
        const Matrix R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        const double rmax = R.diagonal().cwiseAbs().maxCoeff();
        if (R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * rmax) continue;
        Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
        for (Index j = 0; j < k; ++j)
            if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
        return Q;
    }
    throw Error(ErrorCode::RankDeficientDraw, "Gaussian draw was rank deficient twice");
}

struct SymmetricEigen {
    Vector eigenvalues;  // ascending
    Matrix eigenvectors;  // orthogonal, columns match eigenvalues
};

inline SymmetricEigen symmetric_eigen(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    detail::require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "symmetric eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigengap(const Vector& ascending) {
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 1; i < ascending.size(); ++i) gap = std::min(gap, ascending[i] - ascending[i - 1]);
    return gap;
}

/// A = H H^T with H standard Gaussian n x n, exactly symmetric. Redrawn once if
/// the minimum eigengap is <= 1e-10.
inline Matrix sample_wishart_A(Index n, Rng& rng) {
    detail::require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
    for (int attempt = 0; attempt < 2; ++attempt) {
        const Matrix H = sample_gaussian(n, n, rng);
        Matrix A = H * H.transpose();
        A = (0.5 * (A + A.transpose())).eval();
        if (min_eigengap(symmetric_eigen(A).eigenvalues) > 1e-10) return A;
    }
    throw Error(ErrorCode::DegenerateSpectrum, "Wishart draw had a repeated eigenvalue twice");
}

struct IsotropyReport {
    Index trials = 0;
    double max_abs_mean = 0.0;            // over all coordinates of C = B Q
    double max_second_moment_dev = 0.0;   // max |E[C_ij^2] - 1/n|
    double max_orthonormality_err = 0.0;  // max ||C^T C - I||_F over draws
    double tolerance = 0.0;               // 4 / sqrt(trials)
    bool passes = false;
};

/// Moment-level isotropy of C = B Q for Q isotropic on S_{n,k} and a fixed
/// orthogonal B: entry means near 0 and entry second moments near 1/n.
inline IsotropyReport isotropy_product_check(Rng& rng, Index n, Index k, Index trials, const Matrix& B) {
    detail::require(n >= 1 && n <= 32, ErrorCode::SizeGuardExceeded, "isotropy check limited to n <= 32");
    detail::require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    detail::require(B.rows() == n && B.cols() == n, ErrorCode::DimensionMismatch, "B must be n x n");
    detail::require((B.transpose() * B - Matrix::Identity(n, n)).norm() <= 1e-10,
                    ErrorCode::NonOrthonormalBasis, "B must be orthogonal");
    Matrix sum = Matrix::Zero(n, k);
    Matrix sum_sq = Matrix::Zero(n, k);
    IsotropyReport rep;
    rep.trials = trials;
    for (Index t = 0; t < trials; ++t) {
        const Matrix C = B * sample_stiefel(n, k, rng);
        sum += C;
        sum_sq += C.cwiseProduct(C);
        rep.max_orthonormality_err =
            std::max(rep.max_orthonormality_err, (C.transpose() * C - Matrix::Identity(k, k)).norm());
    }
    const double T = static_cast<double>(trials);
    rep.max_abs_mean = (sum / T).cwiseAbs().maxCoeff();
    rep.max_second_moment_dev = ((sum_sq / T).array() - 1.0 / static_cast<double>(n)).abs().maxCoeff();
    rep.tolerance = 4.0 / std::sqrt(T);
    rep.passes = rep.max_abs_mean <= rep.tolerance && rep.max_second_moment_dev <= rep.tolerance &&
                 rep.max_orthonormality_err <= 1e-10;
    return rep;
}

/// m distinct times drawn uniformly from {0, ..., t_max}, sorted.
inline ObservationSchedule random_distinct_times(Index m, std::int64_t t_max, Rng& rng) {
    detail::require(m >= 1 && t_max >= 0 && m <= t_max + 1, ErrorCode::InvalidSchedule,
                    "cannot draw m distinct times from {0..t_max}");
    std::vector<std::int64_t> pool(static_cast<std::size_t>(t_max + 1));
    std::iota(pool.begin(), pool.end(), std::int64_t{0});
    for (Index i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return ObservationSchedule(std::move(pool));
}

/// K distinct indices from {0..n-1}, each with magnitude U[lo, hi] and a random sign.
inline SparseVector random_sparse_vector(Index n, Index K, Rng& rng, double lo = 1.0, double hi = 2.0) {
    detail::require(K >= 0 && K <= n, ErrorCode::InvalidArgument, "K must lie in [0, n]");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::vector<SparseVector::Entry> entries;
    for (Index i = 0; i < K; ++i) {
        const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        const double mag = rng.uniform(lo, hi);
        entries.push_back({idx[static_cast<std::size_t>(i)], rng.sign() * mag});
    }
    return SparseVector(n, std::move(entries));
}

/// n values in [lo, hi] with pairwise gaps >= min_gap (rejection on the whole draw).
inline std::vector<double> distinct_uniform(Index n, double lo, double hi, double min_gap, Rng& rng,
                                            int max_attempts = 1000) {
    for (int a = 0; a < max_attempts; ++a) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = rng.uniform(lo, hi);
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (std::size_t i = 1; i < s.size() && ok; ++i) ok = s[i] - s[i - 1] >= min_gap;
        if (ok) return v;
    }
    throw Error(ErrorCode::InvalidArgument, "could not draw well-separated values");
}

}  // namespace sparseobs

#endif  // SPARSEOBS_STOCHASTIC_HPP
