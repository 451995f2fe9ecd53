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
#ifndef SPARSEOBS_TYPES_HPP
#define SPARSEOBS_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/error.hpp"

namespace sparseobs {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// K-sparse vector: sorted distinct indices with nonzero values.
class SparseVector {
public:
    struct Entry {
        Index index;
        double value;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    SparseVector() = default;
    explicit SparseVector(Index dim) : dim_(dim) {
        detail::require(dim >= 0, ErrorCode::InvalidArgument, "negative dimension");
    }

    /// Entries may arrive in any order; zero values are dropped.
    SparseVector(Index dim, std::vector<Entry> entries) : dim_(dim) {
        detail::require(dim >= 0, ErrorCode::InvalidArgument, "negative dimension");
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.index < b.index; });
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            detail::require(e.index >= 0 && e.index < dim, ErrorCode::InvalidArgument,
                            "sparse index out of range");
            detail::require(i == 0 || entries[i - 1].index != e.index, ErrorCode::InvalidArgument,
                            "duplicate sparse index");
            if (e.value != 0.0) entries_.push_back(e);
        }
    }

    /// Keeps entries with |v| > threshold.
    static SparseVector from_dense(const Vector& v, double threshold = 0.0) {
        SparseVector out(v.size());
        for (Index i = 0; i < v.size(); ++i)
            if (v[i] != 0.0 && std::abs(v[i]) > threshold) out.entries_.push_back({i, v[i]});
        return out;
    }

    static SparseVector unit(Index dim, Index i, double value = 1.0) {
        return SparseVector(dim, {{i, value}});
    }

    Index dim() const noexcept { return dim_; }
    Index k() const noexcept { return static_cast<Index>(entries_.size()); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    std::vector<Index> support() const {
        std::vector<Index> s;
        s.reserve(entries_.size());
        for (const auto& e : entries_) s.push_back(e.index);
        return s;
    }

    double operator[](Index i) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                                   [](const Entry& e, Index j) { return e.index < j; });
        return (it != entries_.end() && it->index == i) ? it->value : 0.0;
    }

    Vector dense() const {
        Vector v = Vector::Zero(dim_);
        for (const auto& e : entries_) v[e.index] = e.value;
        return v;
    }

    double norm_inf() const {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
        return m;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    Index dim_ = 0;
    std::vector<Entry> entries_;
};

/// Strictly increasing nonnegative observation times (the instants with eta_t = 1).
class ObservationSchedule {
public:
    ObservationSchedule() = default;

    explicit ObservationSchedule(std::vector<std::int64_t> times) : times_(std::move(times)) {
        detail::require(!times_.empty(), ErrorCode::InvalidSchedule, "schedule must be non-empty");
        for (std::size_t i = 0; i < times_.size(); ++i) {
            detail::require(times_[i] >= 0, ErrorCode::InvalidSchedule, "negative observation time");
            detail::require(i == 0 || times_[i] > times_[i - 1], ErrorCode::InvalidSchedule,
                            "observation times must be strictly increasing");
        }
    }

    /// t0, t0+1, ..., t0+m-1
    static ObservationSchedule successive(Index m, std::int64_t t0 = 0) {
        detail::require(m >= 1, ErrorCode::InvalidSchedule, "schedule must be non-empty");
        std::vector<std::int64_t> t(static_cast<std::size_t>(m));
        for (Index i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] = t0 + i;
        return ObservationSchedule(std::move(t));
    }

    const std::vector<std::int64_t>& times() const noexcept { return times_; }
    Index m() const noexcept { return static_cast<Index>(times_.size()); }

    friend bool operator==(const ObservationSchedule&, const ObservationSchedule&) = default;

private:
    std::vector<std::int64_t> times_;
};

}  // namespace sparseobs

#endif  // SPARSEOBS_TYPES_HPP
