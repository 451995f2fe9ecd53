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
#ifndef SPARSEOBS_IO_HPP
#define SPARSEOBS_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparseobs/conditions.hpp"
#include "sparseobs/error.hpp"
#include "sparseobs/experiments.hpp"
#include "sparseobs/system_model.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers and tables

/// Decimal with 17 significant digits; non-finite values print as inf, -inf, nan.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<std::int64_t, double, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        sparseobs::detail::require(row.size() == columns.size(), ErrorCode::DimensionMismatch, "row width differs from header");
        rows.push_back(std::move(row));
    }
};

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return format_double(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return csv_field(v);
            else return std::to_string(v);
        },
        c);
}

/// Header row, comma separated, LF line endings.
inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << csv_field(t.columns[j]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << cell_text(row[j]);
        os << '\n';
    }
}

/// Finite doubles become JSON numbers; non-finite ones become the strings of format_double.
inline json double_json(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

inline json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return double_json(v);
            else return json(v);
        },
        c);
}

/// Array of objects keyed by column name.
inline json table_json(const Table& t) {
    json arr = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t j = 0; j < row.size(); ++j) obj[t.columns[j]] = cell_json(row[j]);
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Matrices and vectors

inline Matrix matrix_from_json(const json& j, const char* name) {
    auto fail = [&] { throw Error(ErrorCode::ConfigError, std::string(name) + " must be a non-empty array of equal-length numeric rows"); };
    if (!j.is_array() || j.empty()) fail();
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) fail();
    const auto cols = static_cast<Index>(j[0].size());
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& r = j[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Index>(r.size()) != cols) fail();
        for (Index k = 0; k < cols; ++k) {
            const json& v = r[static_cast<std::size_t>(k)];
            if (!v.is_number()) fail();
            M(i, k) = v.get<double>();
        }
    }
    return M;
}

inline Vector vector_from_json(const json& j, const char* name) {
    if (!j.is_array()) throw Error(ErrorCode::ConfigError, std::string(name) + " must be a numeric array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorCode::ConfigError, std::string(name) + " must be a numeric array");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline json matrix_json(const Matrix& M) {
    json out = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        out.push_back(std::move(row));
    }
    return out;
}

inline json vector_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(double_json(v[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Systems: {"A": [[...]], "C": [[...]], "B": optional, "times": [...]}

struct SystemData {
    LtiSystem system;
    ObservationSchedule schedule;
};

inline std::vector<std::int64_t> times_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::ConfigError, "times must be an integer array");
    std::vector<std::int64_t> t;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, "times must be an integer array");
        t.push_back(v.get<std::int64_t>());
    }
    return t;
}

inline SystemData system_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "system must be a JSON object");
    for (const auto& key : {"A", "C", "times"})
        if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("system is missing \"") + key + "\"");
    std::optional<Matrix> B;
    if (j.contains("B") && !j.at("B").is_null()) B = matrix_from_json(j.at("B"), "B");
    return {LtiSystem(matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("C"), "C"), std::move(B)),
            ObservationSchedule(times_from_json(j.at("times")))};
}

inline json system_json(const LtiSystem& sys, const ObservationSchedule& sched) {
    return {{"A", matrix_json(sys.A())}, {"C", matrix_json(sys.C())}, {"B", matrix_json(sys.B())}, {"times", sched.times()}};
}

// ---------------------------------------------------------------------------
// Enumerations

template <typename E>
using EnumNames = std::vector<std::pair<E, const char*>>;

inline const EnumNames<ExperimentKind>& kind_names() {
    static const EnumNames<ExperimentKind> names{{ExperimentKind::PronyExact, "prony_exact"},
                                                 {ExperimentKind::L1SignAligned, "l1_sign_aligned"},
                                                 {ExperimentKind::CoherenceSweep, "coherence_sweep"},
                                                 {ExperimentKind::PhaseTransition, "phase_transition"},
                                                 {ExperimentKind::AdaptiveCollect, "adaptive_collect"},
                                                 {ExperimentKind::RankCheck, "rank_check"}};
    return names;
}

inline const EnumNames<SchedulePolicy>& schedule_names() {
    static const EnumNames<SchedulePolicy> names{{SchedulePolicy::Successive, "successive"},
                                                 {SchedulePolicy::RandomDistinct, "random_distinct"}};
    return names;
}

inline const EnumNames<CheckerKind>& checker_names() {
    static const EnumNames<CheckerKind> names{{CheckerKind::Coherence, "coherence"},
                                              {CheckerKind::NullSpace, "null_space"},
                                              {CheckerKind::RankOnly, "rank_only"}};
    return names;
}

inline const EnumNames<Precision>& precision_names() {
    static const EnumNames<Precision> names{{Precision::Double, "double"}, {Precision::Extended, "extended"}};
    return names;
}

inline const EnumNames<BasisKind>& basis_names() {
    static const EnumNames<BasisKind> names{{BasisKind::Identity, "identity"}, {BasisKind::Random, "random"}};
    return names;
}

inline const EnumNames<SolveSpace>& solve_space_names() {
    static const EnumNames<SolveSpace> names{{SolveSpace::Modal, "modal"}, {SolveSpace::State, "state"}};
    return names;
}

template <typename E>
E enum_from_string(const EnumNames<E>& names, const std::string& s, const char* field) {
    for (const auto& [e, name] : names)
        if (s == name) return e;
    throw Error(ErrorCode::ConfigError, std::string("unknown value \"") + s + "\" for " + field);
}

template <typename E>
std::string enum_to_string(const EnumNames<E>& names, E e) {
    for (const auto& [v, name] : names)
        if (v == e) return name;
    return "unknown";
}

// ---------------------------------------------------------------------------
// Experiment configuration

namespace detail {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw Error(ErrorCode::ConfigError, key + " must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, key + " must be an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                    throw Error(ErrorCode::ConfigError, key + " must be non-negative");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw Error(ErrorCode::ConfigError, key + " must be a number");
        } else {
            if (!v.is_string()) throw Error(ErrorCode::ConfigError, key + " must be a string");
        }
        return v.get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, key + ": " + e.what());
    }
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

template <typename T>
Setter field(T ExperimentConfig::*member) {
    return [member](ExperimentConfig& c, const json& v, const std::string& k) { c.*member = get_as<T>(v, k); };
}

template <typename E>
Setter enum_field(E ExperimentConfig::*member, const EnumNames<E>& (*names)()) {
    return [member, names](ExperimentConfig& c, const json& v, const std::string& k) {
        c.*member = enum_from_string(names(), get_as<std::string>(v, k), k.c_str());
    };
}

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> setters{
        {"kind", enum_field(&ExperimentConfig::kind, &kind_names)},
        {"n", field(&ExperimentConfig::n)},
        {"K", field(&ExperimentConfig::K)},
        {"d_y", field(&ExperimentConfig::d_y)},
        {"trials", field(&ExperimentConfig::trials)},
        {"seed", field(&ExperimentConfig::seed)},
        {"lambda_min", field(&ExperimentConfig::lambda_min)},
        {"lambda_max", field(&ExperimentConfig::lambda_max)},
        {"lambda_min_gap", field(&ExperimentConfig::lambda_min_gap)},
        {"lambda_signed", field(&ExperimentConfig::lambda_signed)},
        {"c_min", field(&ExperimentConfig::c_min)},
        {"c_max", field(&ExperimentConfig::c_max)},
        {"c_signed", field(&ExperimentConfig::c_signed)},
        {"x_min", field(&ExperimentConfig::x_min)},
        {"x_max", field(&ExperimentConfig::x_max)},
        {"max_condition", field(&ExperimentConfig::max_condition)},
        {"max_redraws", field(&ExperimentConfig::max_redraws)},
        {"sign_violation", field(&ExperimentConfig::sign_violation)},
        {"solve_space", enum_field(&ExperimentConfig::solve_space, &solve_space_names)},
        {"jordan_fraction", field(&ExperimentConfig::jordan_fraction)},
        {"coherence_margin", field(&ExperimentConfig::coherence_margin)},
        {"min_column_norm", field(&ExperimentConfig::min_column_norm)},
        {"max_sensing_condition", field(&ExperimentConfig::max_sensing_condition)},
        {"wishart_scale", field(&ExperimentConfig::wishart_scale)},
        {"basis", enum_field(&ExperimentConfig::basis, &basis_names)},
        {"precision", enum_field(&ExperimentConfig::precision, &precision_names)},
        {"rank_eps", field(&ExperimentConfig::rank_eps)},
        {"schedule", enum_field(&ExperimentConfig::schedule, &schedule_names)},
        {"t_max", field(&ExperimentConfig::t_max)},
        {"m_min", field(&ExperimentConfig::m_min)},
        {"m_max", field(&ExperimentConfig::m_max)},
        {"m_step", field(&ExperimentConfig::m_step)},
        {"checker", enum_field(&ExperimentConfig::checker, &checker_names)},
        {"check_every", field(&ExperimentConfig::check_every)},
        {"drop_probability", field(&ExperimentConfig::drop_probability)},
        {"out", field(&ExperimentConfig::out)},
    };
    return setters;
}

}  // namespace detail

/// Parses a snake_case config object; unknown keys and ill-typed values are ConfigError.
inline ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    ExperimentConfig cfg;
    const auto& setters = detail::config_setters();
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw Error(ErrorCode::ConfigError, "unknown config key \"" + key + "\"");
        it->second(cfg, value, key);
    }
    validate(cfg);
    return cfg;
}

inline json config_json(const ExperimentConfig& c) {
    return {{"kind", enum_to_string(kind_names(), c.kind)},
            {"n", c.n},
            {"K", c.K},
            {"d_y", c.d_y},
            {"trials", c.trials},
            {"seed", c.seed},
            {"lambda_min", c.lambda_min},
            {"lambda_max", c.lambda_max},
            {"lambda_min_gap", c.lambda_min_gap},
            {"lambda_signed", c.lambda_signed},
            {"c_min", c.c_min},
            {"c_max", c.c_max},
            {"c_signed", c.c_signed},
            {"x_min", c.x_min},
            {"x_max", c.x_max},
            {"max_condition", c.max_condition},
            {"max_redraws", c.max_redraws},
            {"sign_violation", c.sign_violation},
            {"solve_space", enum_to_string(solve_space_names(), c.solve_space)},
            {"jordan_fraction", c.jordan_fraction},
            {"coherence_margin", c.coherence_margin},
            {"min_column_norm", c.min_column_norm},
            {"max_sensing_condition", c.max_sensing_condition},
            {"wishart_scale", c.wishart_scale},
            {"basis", enum_to_string(basis_names(), c.basis)},
            {"precision", enum_to_string(precision_names(), c.precision)},
            {"rank_eps", c.rank_eps},
            {"schedule", enum_to_string(schedule_names(), c.schedule)},
            {"t_max", c.t_max},
            {"m_min", c.m_min},
            {"m_max", c.m_max},
            {"m_step", c.m_step},
            {"checker", enum_to_string(checker_names(), c.checker)},
            {"check_every", c.check_every},
            {"drop_probability", c.drop_probability},
            {"out", c.out}};
}

// ---------------------------------------------------------------------------
// Condition records: {"condition", "K", "value", "holds", "witness"}

struct ConditionRecord {
    std::string condition;
    Index K = 0;
    double value = 0.0;
    bool holds = false;
    json witness;  // null when there is nothing to report
};

inline json condition_json(const ConditionRecord& r) {
    return {{"condition", r.condition}, {"K", r.K}, {"value", double_json(r.value)}, {"holds", r.holds}, {"witness", r.witness}};
}

inline ConditionRecord coherence_record(const CoherenceResult& c, Index K) {
    ConditionRecord r{"coherence", K, c.M, c.admits(K), nullptr};
    if (c.i >= 0) r.witness = json::array({c.i, c.j});
    return r;
}

inline ConditionRecord rip_record(const RipResult& rip) {
    return {"rip", rip.K, rip.delta, !rip.exceeds_one && rip.delta < 1.0, json(rip.argmax_support)};
}

inline ConditionRecord null_space_record(const NullSpaceResult& ns) {
    ConditionRecord r{"null_space", ns.K, ns.worst_c, ns.holds, nullptr};
    if (ns.witness_w) r.witness = {{"w", vector_json(*ns.witness_w)}, {"T", ns.witness_T}};
    return r;
}

inline ConditionRecord hautus_record(const HautusResult& h, Index n) {
    ConditionRecord r{"hautus", n, h.observable ? 1.0 : 0.0, h.observable, nullptr};
    if (h.witness) r.witness = json::array({h.witness->real(), h.witness->imag()});
    return r;
}

inline ConditionRecord unique_record(bool holds, Index K) { return {"unique_k_sparse", K, holds ? 1.0 : 0.0, holds, nullptr}; }

/// value is the largest <g, v_i> off the support (must stay below 1).
inline ConditionRecord fuchs_record(const FuchsCertificate& f, std::span<const Index> support) {
    double off = -kInfinity;
    for (Index i = 0; i < f.inner.size(); ++i)
        if (std::find(support.begin(), support.end(), i) == support.end()) off = std::max(off, f.inner[i]);
    return {"fuchs", static_cast<Index>(support.size()), off, f.valid,
            {{"support", std::vector<Index>(support.begin(), support.end())}, {"g", vector_json(f.g)}}};
}

inline Table condition_table(const std::vector<ConditionRecord>& recs) {
    Table t{{"condition", "K", "value", "holds", "witness"}, {}};
    for (const auto& r : recs)
        t.add({r.condition, static_cast<std::int64_t>(r.K), r.value, r.holds, r.witness.is_null() ? std::string() : r.witness.dump()});
    return t;
}

// ---------------------------------------------------------------------------
// Problem files: a system plus data for simulate, recover, check and adaptive

struct ProblemConfig {
    explicit ProblemConfig(SystemData d) : data(std::move(d)) {}

    SystemData data;
    std::optional<Vector> x0{};
    std::optional<Vector> y{};
    Index K = 1;
    std::vector<std::string> conditions{"coherence"};
    std::vector<Index> support{};  // fuchs certificate only
    CheckerKind checker = CheckerKind::Coherence;
    std::int64_t t_max = 64;
    Index check_every = 1;
    double drop_probability = 0.0;
    std::uint64_t seed = 1;
    std::string out{};
};

inline const std::vector<std::string>& condition_names() {
    static const std::vector<std::string> names{"coherence", "rip", "null_space", "hautus", "unique_k_sparse", "fuchs"};
    return names;
}

inline ProblemConfig problem_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "problem must be a JSON object");
    static const std::vector<std::string> keys{"A", "C", "B", "times", "x0", "y", "K", "conditions", "support",
                                               "checker", "t_max", "check_every", "drop_probability", "seed", "out"};
    for (const auto& [key, value] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw Error(ErrorCode::ConfigError, "unknown problem key \"" + key + "\"");
    json sys = json::object();
    for (const auto& key : {"A", "C", "B", "times"})
        if (j.contains(key)) sys[key] = j.at(key);
    ProblemConfig p(system_from_json(sys));
    const Index n = p.data.system.n();
    if (j.contains("x0")) {
        p.x0 = vector_from_json(j.at("x0"), "x0");
        sparseobs::detail::require(p.x0->size() == n, ErrorCode::ConfigError, "x0 length differs from n");
    }
    if (j.contains("y")) {
        p.y = vector_from_json(j.at("y"), "y");
        sparseobs::detail::require(p.y->size() == p.data.schedule.m() * p.data.system.d_y(), ErrorCode::ConfigError,
                        "y length differs from m * d_y");
    }
    if (j.contains("K")) p.K = detail::get_as<Index>(j.at("K"), "K");
    sparseobs::detail::require(p.K >= 1, ErrorCode::ConfigError, "K must be >= 1");
    if (j.contains("conditions")) {
        const json& c = j.at("conditions");
        sparseobs::detail::require(c.is_array() && !c.empty(), ErrorCode::ConfigError, "conditions must be a non-empty array");
        p.conditions.clear();
        for (const auto& v : c) {
            const auto name = detail::get_as<std::string>(v, "conditions");
            const auto& known = condition_names();
            sparseobs::detail::require(std::find(known.begin(), known.end(), name) != known.end(), ErrorCode::ConfigError,
                            "unknown condition name");
            p.conditions.push_back(name);
        }
    }
    if (j.contains("support")) {
        sparseobs::detail::require(j.at("support").is_array(), ErrorCode::ConfigError, "support must be an integer array");
        for (const auto& v : j.at("support")) {
            const auto i = detail::get_as<Index>(v, "support");
            sparseobs::detail::require(i >= 0 && i < n, ErrorCode::ConfigError, "support index out of range");
            p.support.push_back(i);
        }
    }
    if (j.contains("checker"))
        p.checker = enum_from_string(checker_names(), detail::get_as<std::string>(j.at("checker"), "checker"), "checker");
    if (j.contains("t_max")) p.t_max = detail::get_as<std::int64_t>(j.at("t_max"), "t_max");
    if (j.contains("check_every")) p.check_every = detail::get_as<Index>(j.at("check_every"), "check_every");
    if (j.contains("drop_probability"))
        p.drop_probability = detail::get_as<double>(j.at("drop_probability"), "drop_probability");
    if (j.contains("seed")) p.seed = detail::get_as<std::uint64_t>(j.at("seed"), "seed");
    if (j.contains("out")) p.out = detail::get_as<std::string>(j.at("out"), "out");
    sparseobs::detail::require(p.t_max >= 0, ErrorCode::ConfigError, "t_max must be >= 0");
    sparseobs::detail::require(p.check_every >= 1, ErrorCode::ConfigError, "check_every must be >= 1");
    sparseobs::detail::require(p.drop_probability >= 0.0 && p.drop_probability < 1.0, ErrorCode::ConfigError,
                    "drop_probability must lie in [0, 1)");
    return p;
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

}  // namespace sparseobs::io

#endif  // SPARSEOBS_IO_HPP
