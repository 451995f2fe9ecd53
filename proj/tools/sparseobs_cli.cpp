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
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparseobs/sparseobs.hpp"

namespace {

using namespace sparseobs;
using io::json;

enum Exit : int { kOk = 0, kConfig = 2, kSolver = 3, kGuard = 4 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string method = "l1";
    std::string format = "csv";
};

/// Thrown by the input stage so its failures map to the config exit code.
struct InputError {
    Error error;
};

struct Output {
    std::optional<io::Table> table;
    json doc;
    int code = kOk;
};

json load(const Options& opt) {
    try {
        return io::read_json_file(opt.config);
    } catch (const Error& e) {
        throw InputError{e};
    }
}

template <typename F>
auto input_stage(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw InputError{e};
    }
}

io::ProblemConfig load_problem(const Options& opt) {
    return input_stage([&] {
        json j = load(opt);
        if (opt.seed && j.is_object()) j["seed"] = *opt.seed;
        return io::problem_from_json(j);
    });
}

ExperimentConfig load_experiment(const Options& opt) {
    return input_stage([&] {
        json j = load(opt);
        if (opt.seed && j.is_object()) j["seed"] = *opt.seed;
        return io::config_from_json(j);
    });
}

Vector observations(const io::ProblemConfig& p) {
    if (p.y) return *p.y;
    if (!p.x0) throw InputError{Error(ErrorCode::ConfigError, "problem needs \"y\" or \"x0\"")};
    return simulate_outputs(p.data.system, *p.x0, p.data.schedule);
}

Matrix sensing_matrix(const io::ProblemConfig& p) {
    return observability_matrix(p.data.system, p.data.schedule) * p.data.system.B();
}

/// Diagonal A with a single output row, as Prony and the certificate require.
void require_diagonal(const LtiSystem& sys) {
    const Matrix& A = sys.A();
    const bool diagonal = (A - Matrix(A.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (!diagonal || sys.d_y() != 1)
        throw InputError{Error(ErrorCode::ConfigError, "this operation needs a diagonal A and a single output row")};
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Output cmd_simulate(const Options& opt) {
    const auto p = load_problem(opt);
    if (!p.x0) throw InputError{Error(ErrorCode::ConfigError, "simulate needs \"x0\"")};
    const Vector y = simulate_outputs(p.data.system, *p.x0, p.data.schedule);
    Output out;
    out.table = io::Table{{"t", "output", "y"}, {}};
    const Index dy = p.data.system.d_y();
    for (Index i = 0; i < p.data.schedule.m(); ++i)
        for (Index k = 0; k < dy; ++k)
            out.table->add({p.data.schedule.times()[static_cast<std::size_t>(i)], static_cast<std::int64_t>(k), y[i * dy + k]});
    return out;
}

Output cmd_recover(const Options& opt) {
    const auto p = load_problem(opt);
    const Vector y = observations(p);
    RecoveryReport rep;
    if (opt.method == "prony") {
        require_diagonal(p.data.system);
        const auto& times = p.data.schedule.times();
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] != times[i - 1] + 1)
                throw InputError{Error(ErrorCode::ConfigError, "prony needs consecutive observation times")};
        const auto lambdas = to_std(p.data.system.A().diagonal());
        const auto c = to_std(p.data.system.C().row(0).transpose());
        rep = prony_recover(lambdas, c, y, p.K, times.front());
    } else {
        const Matrix Phi = sensing_matrix(p);
        if (opt.method == "l1") rep = l1_recover(Phi, y);
        else if (opt.method == "sp") rep = subspace_pursuit(Phi, y, p.K);
        else rep = l0_oracle(Phi, y, p.K);
        rep.x0 = p.data.system.B() * rep.estimate.dense();
    }
    Output out;
    const Vector s = rep.estimate.dense();
    out.table = io::Table{{"index", "s", "x0"}, {}};
    for (Index i = 0; i < s.size(); ++i) out.table->add({static_cast<std::int64_t>(i), s[i], rep.x0[i]});
    json diag = json::object();
    for (const auto& [k, v] : rep.diagnostics) diag[k] = io::double_json(v);
    out.doc = {{"method", std::string(to_string(rep.method))},
               {"s", io::vector_json(s)},
               {"x0", io::vector_json(rep.x0)},
               {"residual_inf", io::double_json(rep.residual_inf)},
               {"exact_constraint_satisfied", rep.exact_constraint_satisfied},
               {"diagnostics", diag}};
    return out;
}

Output cmd_check(const Options& opt) {
    const auto p = load_problem(opt);
    const Matrix Phi = sensing_matrix(p);
    std::vector<io::ConditionRecord> recs;
    for (const auto& name : p.conditions) {
        if (name == "coherence") {
            recs.push_back(io::coherence_record(mutual_coherence(Phi), p.K));
        } else if (name == "rip") {
            recs.push_back(io::rip_record(rip_constant(Phi, p.K)));
        } else if (name == "null_space") {
            recs.push_back(io::null_space_record(null_space_condition(Phi, p.K)));
        } else if (name == "hautus") {
            recs.push_back(io::hautus_record(hautus_observable(p.data.system.A(), p.data.system.C()), p.data.system.n()));
        } else if (name == "unique_k_sparse") {
            recs.push_back(io::unique_record(unique_k_sparse(Phi, p.K), p.K));
        } else {
            require_diagonal(p.data.system);
            if (p.support.empty()) throw InputError{Error(ErrorCode::ConfigError, "fuchs needs \"support\"")};
            const auto lambdas = to_std(p.data.system.A().diagonal());
            recs.push_back(io::fuchs_record(fuchs_certificate(lambdas, p.support, p.data.schedule.m()), p.support));
        }
    }
    Output out;
    out.table = io::condition_table(recs);
    out.doc = json::array();
    for (const auto& r : recs) out.doc.push_back(io::condition_json(r));
    return out;
}

Output cmd_phase(const Options& opt) {
    const auto cfg = load_experiment(opt);
    if (cfg.kind != ExperimentKind::PhaseTransition)
        throw InputError{Error(ErrorCode::ConfigError, "phase needs kind = phase_transition")};
    Output out;
    out.table = io::Table{{"m", "successes", "trials", "success_rate", "solver_errors", "mean_rank"}, {}};
    for (const auto& pt : run_phase_transition(cfg))
        out.table->add({static_cast<std::int64_t>(pt.m), static_cast<std::int64_t>(pt.successes),
                        static_cast<std::int64_t>(pt.trials), pt.success_rate, static_cast<std::int64_t>(pt.solver_errors),
                        pt.mean_rank});
    return out;
}

Output adaptive_output(const AdaptiveResult& res, const Vector& truth) {
    Output out;
    out.table = io::Table{{"m", "t", "value", "holds"}, {}};
    for (const auto& st : res.trace)
        out.table->add({static_cast<std::int64_t>(st.m), st.t, st.value, st.holds});
    json trace = io::table_json(*out.table);
    out.doc = {{"condition_met", res.condition_met},
               {"times", res.schedule.times()},
               {"x0", io::vector_json(res.report.x0)},
               {"exact", exact_recovery(res.report.x0, truth)},
               {"trace", trace}};
    out.code = res.condition_met ? kOk : kSolver;
    return out;
}

Output cmd_adaptive(const Options& opt) {
    const json j = input_stage([&] { return load(opt); });
    if (j.is_object() && j.contains("A")) {
        const auto p = load_problem(opt);
        if (!p.x0) throw InputError{Error(ErrorCode::ConfigError, "adaptive needs \"x0\"")};
        const AdaptiveOptions ao{p.checker, p.K, p.t_max, p.check_every, p.drop_probability, p.seed};
        return adaptive_output(adaptive_collect(p.data.system, *p.x0, ao), *p.x0);
    }
    const auto cfg = load_experiment(opt);
    if (cfg.kind != ExperimentKind::AdaptiveCollect)
        throw InputError{Error(ErrorCode::ConfigError, "adaptive needs kind = adaptive_collect or an explicit system")};
    Rng rng(cfg.seed, trial_stream(5, 0));
    Index redraws = 0;
    const auto inst = detail::draw_conditioned(cfg, rng, true, redraws);
    const LtiSystem sys = make_diagonal_system(inst.lambdas, inst.c);
    const Vector x0 = inst.x0.dense();
    const AdaptiveOptions ao{cfg.checker, cfg.K, cfg.t_max, cfg.check_every, cfg.drop_probability, cfg.seed};
    return adaptive_output(adaptive_collect(sys, x0, ao), x0);
}

io::Table sweep_table(const SweepResult& res) {
    io::Table t{{"trial", "success", "error", "redraws", "k", "failure"}, {}};
    for (const auto& r : res.records)
        t.add({static_cast<std::int64_t>(r.trial), r.success, r.error, static_cast<std::int64_t>(r.redraws),
               static_cast<std::int64_t>(r.k), r.failure});
    return t;
}

Output cmd_sweep(const Options& opt) {
    const auto cfg = load_experiment(opt);
    Output out;
    switch (cfg.kind) {
        case ExperimentKind::PronyExact: out.table = sweep_table(run_prony_sweep(cfg)); break;
        case ExperimentKind::L1SignAligned: out.table = sweep_table(run_sign_aligned_sweep(cfg)); break;
        case ExperimentKind::CoherenceSweep: {
            out.table = io::Table{{"trial", "n", "m", "jordan", "M", "bound", "k_admitted", "signals", "counterexamples",
                                   "redraws"},
                                  {}};
            for (const auto& r : run_coherence_sweep(cfg).records)
                out.table->add({static_cast<std::int64_t>(r.trial), static_cast<std::int64_t>(r.n),
                                static_cast<std::int64_t>(r.m), r.jordan, r.M, r.bound,
                                static_cast<std::int64_t>(r.k_admitted), static_cast<std::int64_t>(r.signals),
                                static_cast<std::int64_t>(r.counterexamples), static_cast<std::int64_t>(r.redraws)});
            break;
        }
        case ExperimentKind::RankCheck: {
            out.table = io::Table{{"trial", "m", "rank", "full"}, {}};
            for (const auto& r : run_rank_check(cfg))
                out.table->add({static_cast<std::int64_t>(r.trial), static_cast<std::int64_t>(r.m),
                                static_cast<std::int64_t>(r.rank), r.full});
            break;
        }
        default:
            throw InputError{Error(ErrorCode::ConfigError,
                                   "sweep needs kind prony_exact, l1_sign_aligned, coherence_sweep or rank_check")};
    }
    return out;
}

void emit(const Output& res, const Options& opt, const std::string& config_out) {
    std::ostringstream buf;
    if (opt.format == "json") io::write_json(buf, res.table && res.doc.is_null() ? io::table_json(*res.table) : res.doc);
    else io::write_csv(buf, *res.table);
    const std::string path = !opt.out.empty() ? opt.out : config_out;
    if (path.empty() || path == "-") {
        std::cout << buf.str() << std::flush;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError{Error(ErrorCode::ConfigError, "cannot write " + path)};
    f << buf.str();
}

/// Output path named inside the config file, if any.
std::string config_out(const Options& opt) {
    try {
        const json j = io::read_json_file(opt.config);
        if (j.is_object() && j.contains("out") && j.at("out").is_string()) return j.at("out").get<std::string>();
    } catch (const Error&) {
    }
    return {};
}

int code_for(const Error& e) {
    if (e.code() == ErrorCode::SizeGuardExceeded) return kGuard;
    if (e.code() == ErrorCode::ConfigError) return kConfig;
    return kSolver;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparseobs: sparse initial-state recovery for discrete-time linear systems"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--out", opt.out, "output path (default: stdout)");
        sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };
    std::vector<std::pair<CLI::App*, Output (*)(const Options&)>> cmds{
        {app.add_subcommand("simulate", "stacked outputs y for a system and x0"), &cmd_simulate},
        {app.add_subcommand("recover", "recover x0 from observations"), &cmd_recover},
        {app.add_subcommand("check", "evaluate recoverability conditions"), &cmd_check},
        {app.add_subcommand("phase", "phase-transition sweep over m"), &cmd_phase},
        {app.add_subcommand("adaptive", "collect observations until a condition holds"), &cmd_adaptive},
        {app.add_subcommand("sweep", "exactness, coherence and rank sweeps"), &cmd_sweep},
    };
    for (auto& [sub, fn] : cmds) add_common(sub);
    cmds[1].first->add_option("--method", opt.method, "recovery method")->check(CLI::IsMember({"l1", "sp", "prony", "l0"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    for (auto& [sub, fn] : cmds) {
        if (!sub->parsed()) continue;
        try {
            const Output res = fn(opt);
            emit(res, opt, config_out(opt));
            return res.code;
        } catch (const InputError& e) {
            std::cerr << "error: " << e.error.what() << '\n';
            return e.error.code() == ErrorCode::SizeGuardExceeded ? kGuard : kConfig;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return code_for(e);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kSolver;
        }
    }
    return kConfig;
}
