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
#ifndef SPARSEOBS_ERROR_HPP
#define SPARSEOBS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparseobs {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NonSquare,
    NonOrthonormalBasis,
    InvalidSchedule,
    ZeroEigenvalue,
    ZeroObservationEntry,
    DuplicateEigenvalue,
    ZeroLeadingEntry,
    Infeasible,
    Unbounded,
    MaxPivotsExceeded,
    RootMatchFailure,
    NoSparseSolution,
    SizeGuardExceeded,
    ZeroMatrix,
    ZeroColumn,
    EigenFailure,
    RankDeficientDraw,
    DegenerateSpectrum,
    ConditionNeverMet,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::ZeroObservationEntry: return "ZeroObservationEntry";
    case ErrorCode::DuplicateEigenvalue: return "DuplicateEigenvalue";
    case ErrorCode::ZeroLeadingEntry: return "ZeroLeadingEntry";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::MaxPivotsExceeded: return "MaxPivotsExceeded";
    case ErrorCode::RootMatchFailure: return "RootMatchFailure";
    case ErrorCode::NoSparseSolution: return "NoSparseSolution";
    case ErrorCode::SizeGuardExceeded: return "SizeGuardExceeded";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::RankDeficientDraw: return "RankDeficientDraw";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::ConditionNeverMet: return "ConditionNeverMet";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code; every failure in the library
/// is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const char* msg) {
    if (!cond) throw Error(code, msg);
}

}  // namespace detail
}  // namespace sparseobs

#endif  // SPARSEOBS_ERROR_HPP
