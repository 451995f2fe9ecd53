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
#ifndef SPARSEOBS_EXPERIMENTS_HPP
#define SPARSEOBS_EXPERIMENTS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseobs/conditions.hpp"
#include "sparseobs/error.hpp"
#include "sparseobs/recovery.hpp"
#include "sparseobs/stochastic.hpp"
#include "sparseobs/system_model.hpp"
#include "sparseobs/types.hpp"

namespace sparseobs {

enum class ExperimentKind { PronyExact, L1SignAligned, CoherenceSweep, PhaseTransition, AdaptiveCollect, RankCheck };
enum class SchedulePolicy { Successive, RandomDistinct };
enum class CheckerKind { Coherence, NullSpace, RankOnly };
enum class Precision { Double, Extended };

inline constexpr double kExtendedRankEps = 1e-15;
enum class BasisKind { Identity, Random };
enum class SolveSpace { Modal, State };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::PhaseTransition;
    Index n = 50;
    Index K = 3;
    Index d_y = 1;
    Index trials = 200;
    std::uint64_t seed = 1;

    // Diagonal / Jordan instances.
    double lambda_min = 0.3;
    double lambda_max = 2.2;
    double lambda_min_gap = 1e-3;
    bool lambda_signed = false;      // draw eigenvalue signs at random
    double c_min = 0.5;
    double c_max = 2.0;
    bool c_signed = false;
    double x_min = 1.0;              // spike magnitudes
    double x_max = 2.0;
    double max_condition = 1e5;      // support Vandermonde conditioning before a re-draw
    Index max_redraws = 3;
    bool sign_violation = false;     // flip one spike against sign(c)
    SolveSpace solve_space = SolveSpace::Modal;
    double jordan_fraction = 0.5;
    double coherence_margin = 1e-4;       // coherence sweep instance guards
    double min_column_norm = 1e-3;
    double max_sensing_condition = 1e8;

    // Random ensembles.
    double wishart_scale = 0.0;      // 0 selects 1 / (4 n)
    BasisKind basis = BasisKind::Identity;
    Precision precision = Precision::Extended;
    double rank_eps = 0.0;           // 0 selects the precision default

    // Schedules and sweeps.
    SchedulePolicy schedule = SchedulePolicy::Successive;
    std::int64_t t_max = 64;
    Index m_min = 0;                 // 0 selects K
    Index m_max = 30;
    Index m_step = 1;

    // Adaptive collection.
    CheckerKind checker = CheckerKind::Coherence;
    Index check_every = 1;
    double drop_probability = 0.0;

    std::string out;                 // output path; empty writes to stdout
};

inline void validate(const ExperimentConfig& cfg) {
    auto need = [](bool ok, const char* msg) { detail::require(ok, ErrorCode::ConfigError, msg); };
    need(cfg.trials >= 1, "trials must be >= 1");
    need(cfg.n >= 1, "n must be >= 1");
    need(cfg.K >= 1 && cfg.K < cfg.n, "K must satisfy 1 <= K < n");
    need(cfg.d_y >= 1, "d_y must be >= 1");
    need(cfg.lambda_min > 0.0 && cfg.lambda_min < cfg.lambda_max, "need 0 < lambda_min < lambda_max");
    need(cfg.lambda_min_gap >= 0.0, "lambda_min_gap must be >= 0");
    need(cfg.c_min > 0.0 && cfg.c_min <= cfg.c_max, "need 0 < c_min <= c_max");
    need(cfg.x_min > 0.0 && cfg.x_min <= cfg.x_max, "need 0 < x_min <= x_max");
    need(cfg.max_redraws >= 0, "max_redraws must be >= 0");
    need(cfg.wishart_scale >= 0.0, "wishart_scale must be >= 0");
    need(cfg.rank_eps >= 0.0, "rank_eps must be >= 0");
    need(cfg.t_max >= 0 && cfg.t_max <= 128, "t_max must lie in [0, 128]");
    need(cfg.m_step >= 1, "m_step must be >= 1");
    need(cfg.m_max >= std::max<Index>(1, cfg.m_min), "m_max must be >= m_min");
    need(cfg.check_every >= 1, "check_every must be >= 1");
    need(cfg.drop_probability >= 0.0 && cfg.drop_probability < 1.0, "drop_probability must lie in [0, 1)");
    need(cfg.jordan_fraction >= 0.0 && cfg.jordan_fraction <= 1.0, "jordan_fraction must lie in [0, 1]");
    need(cfg.coherence_margin >= 0.0 && cfg.coherence_margin < 1.0, "coherence_margin must lie in [0, 1)");
    need(cfg.min_column_norm >= 0.0, "min_column_norm must be >= 0");
    need(cfg.max_sensing_condition >= 1.0, "max_sensing_condition must be >= 1");
    if (cfg.schedule == SchedulePolicy::RandomDistinct)
        need(cfg.m_max <= cfg.t_max + 1, "m_max exceeds the number of available times");
}

/// Success criterion shared by all sweeps: ||xhat - x0||_inf <= 1e-6 (1 + ||x0||_inf).
inline bool exact_recovery(const Vector& estimate, const Vector& truth, double rel = 1e-6) {
    return linalg::norm_inf(estimate - truth) <= rel * (1.0 + linalg::norm_inf(truth));
}

inline double relative_error(const Vector& estimate, const Vector& truth) {
    return linalg::norm_inf(estimate - truth) / (1.0 + linalg::norm_inf(truth));
}

/// Per-trial substream index: sweep coordinate in the high word, trial in the low word.
inline std::uint64_t trial_stream(std::uint64_t coordinate, std::uint64_t trial) {
    return (coordinate << 32) | (trial & 0xFFFFFFFFULL);
}

/// l1 on unit-normalised columns, mapped back: x_i = z_i / ||phi_i||.
inline RecoveryReport l1_unit_columns(const Matrix& Phi, const Vector& y, const LpOptions& lp = {}) {
    Vector w = Phi.colwise().norm().transpose();
    for (Index j = 0; j < w.size(); ++j)
        detail::require(w[j] > 0.0, ErrorCode::ZeroColumn, "zero column in Phi");
    const Matrix U = Phi * w.cwiseInverse().asDiagonal();
    // Rows are whitened first; the feasible set is unchanged.
    const ReducedSystem red = svd_reduce<double>(U, y, Matrix::Identity(U.cols(), U.cols()));
    RecoveryReport inner = l1_recover(red.reduced_matrix, red.reduced_rhs, lp);
    const Vector x = inner.estimate.dense().cwiseQuotient(w);
    RecoveryReport rep = detail::finish_report(RecoveryMethod::L1, Phi, y, truncate_support(x));
    rep.diagnostics = std::move(inner.diagnostics);
    return rep;
}

// ---------------------------------------------------------------------------
// Phase transition

struct PhasePoint {
    Index m = 0;
    Index successes = 0;
    Index trials = 0;
    double success_rate = 0.0;
    Index solver_errors = 0;
    double mean_rank = 0.0;
};

struct PhaseTrial {
    bool success = false;
    bool solver_error = false;
    Index rank = 0;
};

/// Relative rank threshold used by the phase and rank experiments.
inline double effective_rank_eps(const ExperimentConfig& cfg) {
    if (cfg.rank_eps > 0.0) return cfg.rank_eps;
    return cfg.precision == Precision::Extended ? kExtendedRankEps : linalg::kRankEps;
}

/// One trial: fresh A = scale * H H^T, Gaussian C, K-sparse s, x0 = B s.
inline PhaseTrial phase_trial(const ExperimentConfig& cfg, Index m, std::uint64_t trial) {
    Rng rng(cfg.seed, trial_stream(static_cast<std::uint64_t>(m), trial));
    const Index n = cfg.n;
    const double scale = cfg.wishart_scale > 0.0 ? cfg.wishart_scale : 1.0 / (4.0 * static_cast<double>(n));
    Matrix A = scale * sample_wishart_A(n, rng);
    Matrix C = sample_gaussian(cfg.d_y, n, rng);
    const SparseVector s = random_sparse_vector(n, cfg.K, rng, cfg.x_min, cfg.x_max);
    const ObservationSchedule sched = cfg.schedule == SchedulePolicy::Successive
                                          ? ObservationSchedule::successive(m)
                                          : random_distinct_times(m, cfg.t_max, rng);
    std::optional<Matrix> B;
    if (cfg.basis == BasisKind::Random) {
        Rng brng(cfg.seed, trial_stream(static_cast<std::uint64_t>(m), trial) ^ (1ULL << 63));
        B = sample_stiefel(n, n, brng);
    }
    const LtiSystem sys(std::move(A), std::move(C), B);
    const Vector x0 = sys.B() * s.dense();

    ReduceOptions reduce;
    reduce.rank_eps = effective_rank_eps(cfg);
    PhaseTrial out;
    try {
        RecoveryReport rep;
        if (cfg.precision == Precision::Extended) {
            const auto O = observability_matrix<long double>(sys, sched);
            const auto y = simulate_outputs<long double>(sys, x0, sched);
            rep = recover_via_reduction(O, y, sys.B(), reduce);
        } else {
            const Matrix O = observability_matrix(sys, sched);
            const Vector y = simulate_outputs(sys, x0, sched);
            rep = recover_via_reduction(O, y, sys.B(), reduce);
        }
        out.rank = static_cast<Index>(rep.diagnostics.at("rank"));
        out.success = exact_recovery(rep.x0, x0);
    } catch (const Error&) {
        out.solver_error = true;
    }
    return out;
}

inline std::vector<Index> phase_grid(const ExperimentConfig& cfg) {
    std::vector<Index> ms;
    for (Index m = cfg.m_min > 0 ? cfg.m_min : cfg.K; m <= cfg.m_max; m += cfg.m_step) ms.push_back(m);
    return ms;
}

inline std::vector<PhasePoint> run_phase_transition(const ExperimentConfig& cfg) {
    validate(cfg);
    detail::require(cfg.kind == ExperimentKind::PhaseTransition, ErrorCode::ConfigError,
                    "config kind is not phase_transition");
    std::vector<PhasePoint> points;
    for (Index m : phase_grid(cfg)) {
        PhasePoint p;
        p.m = m;
        p.trials = cfg.trials;
        double rank_sum = 0.0;
        for (Index t = 0; t < cfg.trials; ++t) {
            const PhaseTrial r = phase_trial(cfg, m, static_cast<std::uint64_t>(t));
            p.successes += r.success ? 1 : 0;
            p.solver_errors += r.solver_error ? 1 : 0;
            rank_sum += static_cast<double>(r.rank);
        }
        p.success_rate = static_cast<double>(p.successes) / static_cast<double>(p.trials);
        p.mean_rank = rank_sum / static_cast<double>(p.trials);
        points.push_back(p);
    }
    return points;
}

// ---------------------------------------------------------------------------
// Exactness sweeps for diagonal systems

struct TrialRecord {
    Index trial = 0;
    bool success = false;
    double error = 0.0;            // relative l_inf error, NaN on solver failure
    Index redraws = 0;
    Index k = 0;                   // nonzeros in the estimate
    std::string failure;           // solver error code, empty on success paths
    double lp_seconds = 0.0;       // wall time, not part of any serialised output
};

struct SweepResult {
    std::vector<TrialRecord> records;
    Index successes = 0;
    Index redraws = 0;
    double max_lp_seconds = 0.0;
};

struct DiagonalInstance {
    std::vector<double> lambdas;
    std::vector<double> c;
    SparseVector x0;
    double condition = 0.0;  // of the support Vandermonde on t = 0 .. 2K
};

namespace detail {

inline double support_condition(const std::vector<double>& lambdas, const SparseVector& x0, Index rows) {
    if (x0.k() == 0) return 1.0;
    Matrix V(rows, x0.k());
    const auto supp = x0.support();
    for (Index t = 0; t < rows; ++t)
        for (Index j = 0; j < x0.k(); ++j)
            V(t, j) = std::pow(lambdas[static_cast<std::size_t>(supp[static_cast<std::size_t>(j)])],
                               static_cast<double>(t));
    const Vector sv = linalg::singular_values(V);
    return sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : kInfinity;
}

/// Distinct eigenvalues, observation weights and a K-sparse x0. With
/// `sign_aligned`, x0 takes the sign of c on its support.
inline DiagonalInstance draw_diagonal_instance(const ExperimentConfig& cfg, Rng& rng, bool sign_aligned) {
    DiagonalInstance inst;
    const Index n = cfg.n;
    if (cfg.lambda_signed) {
        // Signed draws must stay distinct in value, so separate the magnitudes.
        inst.lambdas = distinct_uniform(n, cfg.lambda_min, cfg.lambda_max, cfg.lambda_min_gap, rng);
        for (auto& l : inst.lambdas) l *= rng.sign();
    } else {
        inst.lambdas = distinct_uniform(n, cfg.lambda_min, cfg.lambda_max, cfg.lambda_min_gap, rng);
    }
    inst.c.resize(static_cast<std::size_t>(n));
    for (auto& v : inst.c) v = (cfg.c_signed ? rng.sign() : 1.0) * rng.uniform(cfg.c_min, cfg.c_max);
    SparseVector x = random_sparse_vector(n, cfg.K, rng, cfg.x_min, cfg.x_max);
    if (sign_aligned) {
        std::vector<SparseVector::Entry> e = x.entries();
        for (auto& en : e)
            en.value = std::abs(en.value) * (inst.c[static_cast<std::size_t>(en.index)] > 0.0 ? 1.0 : -1.0);
        if (cfg.sign_violation) e.front().value = -e.front().value;
        x = SparseVector(n, std::move(e));
    }
    inst.x0 = std::move(x);
    inst.condition = support_condition(inst.lambdas, inst.x0, 2 * cfg.K + 1);
    return inst;
}

/// Draws until the support conditioning is acceptable or the re-draw budget is spent.
inline DiagonalInstance draw_conditioned(const ExperimentConfig& cfg, Rng& rng, bool sign_aligned, Index& redraws) {
    DiagonalInstance inst = draw_diagonal_instance(cfg, rng, sign_aligned);
    redraws = 0;
    while (inst.condition > cfg.max_condition && redraws < cfg.max_redraws) {
        inst = draw_diagonal_instance(cfg, rng, sign_aligned);
        ++redraws;
    }
    return inst;
}

inline void tally(SweepResult& res, TrialRecord rec) {
    res.successes += rec.success ? 1 : 0;
    res.redraws += rec.redraws;
    res.max_lp_seconds = std::max(res.max_lp_seconds, rec.lp_seconds);
    res.records.push_back(std::move(rec));
}

}  // namespace detail

/// Prony decoding from exactly 2K + 1 consecutive samples t = 0 .. 2K.
inline SweepResult run_prony_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    SweepResult res;
    const Index m = 2 * cfg.K + 1;
    const ObservationSchedule sched = ObservationSchedule::successive(m);
    for (Index t = 0; t < cfg.trials; ++t) {
        Rng rng(cfg.seed, trial_stream(1, static_cast<std::uint64_t>(t)));
        TrialRecord rec;
        rec.trial = t;
        const DiagonalInstance inst = detail::draw_conditioned(cfg, rng, false, rec.redraws);
        const LtiSystem sys = make_diagonal_system(inst.lambdas, inst.c, true);
        const Vector truth = inst.x0.dense();
        const Vector y = simulate_outputs(sys, truth, sched);
        try {
            const RecoveryReport rep = prony_recover(inst.lambdas, inst.c, y, cfg.K);
            rec.error = relative_error(rep.x0, truth);
            rec.success = exact_recovery(rep.x0, truth);
            rec.k = rep.estimate.k();
        } catch (const Error& e) {
            rec.error = std::nan("");
            rec.failure = to_string(e.code());
        }
        detail::tally(res, std::move(rec));
    }
    return res;
}

/// l1 from 2K + 1 successive samples with c_i x_{0,i} >= 0. In the modal space
/// the sensing matrix is the Vandermonde matrix on z = c .* x0; the state space
/// variant solves on O = V diag(c) directly.
inline SweepResult run_sign_aligned_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    SweepResult res;
    const Index m = 2 * cfg.K + 1;
    const ObservationSchedule sched = ObservationSchedule::successive(m);
    for (Index t = 0; t < cfg.trials; ++t) {
        Rng rng(cfg.seed, trial_stream(2, static_cast<std::uint64_t>(t)));
        TrialRecord rec;
        rec.trial = t;
        const DiagonalInstance inst = detail::draw_conditioned(cfg, rng, true, rec.redraws);
        const LtiSystem sys = make_diagonal_system(inst.lambdas, inst.c, true);
        const Vector truth = inst.x0.dense();
        const Vector y = simulate_outputs(sys, truth, sched);
        const Matrix V = vandermonde(inst.lambdas, sched);
        const Eigen::Map<const Vector> c(inst.c.data(), cfg.n);
        try {
            const auto start = std::chrono::steady_clock::now();
            Vector x;
            if (cfg.solve_space == SolveSpace::Modal) {
                const RecoveryReport rep = l1_recover(V, y);
                x = rep.x0.cwiseQuotient(c);
            } else {
                x = l1_recover(V * c.asDiagonal(), y).x0;
            }
            rec.lp_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            rec.error = relative_error(x, truth);
            rec.success = exact_recovery(x, truth);
            rec.k = SparseVector::from_dense(x).k();
        } catch (const Error& e) {
            rec.error = std::nan("");
            rec.failure = to_string(e.code());
        }
        detail::tally(res, std::move(rec));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coherence guarantee sweep

struct CoherenceRecord {
    Index trial = 0;
    Index n = 0;
    Index m = 0;
    bool jordan = false;
    double M = 0.0;
    double bound = 0.0;
    Index k_admitted = 0;
    Index signals = 0;
    Index counterexamples = 0;
    Index redraws = 0;
};

struct CoherenceSweepResult {
    std::vector<CoherenceRecord> records;
    Index signals = 0;
    Index counterexamples = 0;
    Index redraws = 0;
};

/// Largest sparsity the coherence bound guarantees, capped at `cap`. At M = 0
/// the bound is infinite and the usable level is rank / 2.
inline Index admitted_sparsity(const CoherenceResult& coh, Index rank, Index cap) {
    if (coh.M >= 1.0) return 0;
    Index k = coh.M == 0.0 ? rank / 2 : static_cast<Index>(std::floor(coh.sparsity_bound));
    return std::min(k, cap);
}

/// Every vector supported on at most `k_max` indices with entries in {+-1, +-2}.
inline void for_each_small_signal(Index n, Index k_max, const std::function<void(const Vector&)>& visit) {
    static constexpr double kValues[4] = {-2.0, -1.0, 1.0, 2.0};
    for (Index k = 1; k <= k_max; ++k) {
        linalg::for_each_combination(n, k, [&](std::span<const Index> supp) {
            Index patterns = 1;
            for (Index i = 0; i < k; ++i) patterns *= 4;
            for (Index code = 0; code < patterns; ++code) {
                Vector x = Vector::Zero(n);
                Index c = code;
                for (Index i = 0; i < k; ++i, c /= 4) x[supp[static_cast<std::size_t>(i)]] = kValues[c % 4];
                visit(x);
            }
            return true;
        });
    }
}

/// Double-precision resolvability of a sensing matrix: column pairs separated
/// (1 - M >= coherence_margin), no column below min_column_norm, and the
/// unit-column matrix conditioned within max_sensing_condition on its rank.
inline bool resolvable(const Matrix& Phi, const CoherenceResult& coh, const ExperimentConfig& cfg) {
    if (1.0 - coh.M < cfg.coherence_margin) return false;
    const Vector w = Phi.colwise().norm().transpose();
    if (w.minCoeff() < cfg.min_column_norm) return false;
    const Vector sv = linalg::singular_values(Phi * w.cwiseInverse().asDiagonal());
    const Index r = std::min(Phi.rows(), Phi.cols());
    return sv[r - 1] > 0.0 && sv[0] / sv[r - 1] <= cfg.max_sensing_condition;
}

struct CoherenceInstance {
    Matrix Phi;
    CoherenceResult coherence;
    CoherenceRecord record;
};

/// Random diagonal or Jordan system (n in [2, cfg.n]) observed at m in [2, n]
/// random distinct times from {0, ..., min(t_max, 2n)}; re-drawn until `resolvable`.
inline CoherenceInstance draw_coherence_instance(const ExperimentConfig& cfg, Index trial) {
    Rng rng(cfg.seed, trial_stream(3, static_cast<std::uint64_t>(trial)));
    CoherenceInstance inst;
    CoherenceRecord& rec = inst.record;
    rec.trial = trial;
    for (Index attempt = 0;; ++attempt) {
        detail::require(attempt <= 100, ErrorCode::ConfigError, "no resolvable instance after 100 draws");
        rec.n = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(cfg.n - 1)));
        const Index n = rec.n;
        rec.jordan = rng.uniform() < cfg.jordan_fraction;
        std::vector<double> c(static_cast<std::size_t>(n));
        for (auto& v : c) v = rng.sign() * rng.uniform(cfg.c_min, cfg.c_max);
        std::optional<LtiSystem> sys;
        if (rec.jordan) {
            JordanSpec spec;
            for (Index used = 0; used < n;) {
                const Index size = std::min<Index>(n - used, 1 + static_cast<Index>(rng.below(3)));
                spec.blocks.push_back({0.0, size});
                used += size;
            }
            const auto nb = static_cast<Index>(spec.blocks.size());
            const auto lam = distinct_uniform(nb, cfg.lambda_min, cfg.lambda_max, cfg.lambda_min_gap, rng);
            for (Index k = 0; k < nb; ++k)
                spec.blocks[static_cast<std::size_t>(k)].eigenvalue = lam[static_cast<std::size_t>(k)];
            sys = make_jordan_system(spec, c);
        } else {
            const auto lam = distinct_uniform(n, cfg.lambda_min, cfg.lambda_max, cfg.lambda_min_gap, rng);
            sys = make_diagonal_system(lam, c, true);
        }
        const std::int64_t horizon = std::min<std::int64_t>(cfg.t_max, 2 * n);
        rec.m = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
        inst.Phi = observability_matrix(*sys, random_distinct_times(rec.m, horizon, rng));
        inst.coherence = mutual_coherence(inst.Phi);
        if (resolvable(inst.Phi, inst.coherence, cfg)) break;
        ++rec.redraws;
    }
    rec.M = inst.coherence.M;
    rec.bound = inst.coherence.sparsity_bound;
    return inst;
}

/// Every signal the coherence bound covers is recovered by l1 on unit-normalised columns.
inline CoherenceSweepResult run_coherence_sweep(const ExperimentConfig& cfg, Index k_cap = 2) {
    validate(cfg);
    detail::require(cfg.n >= 2 && cfg.n <= 10, ErrorCode::SizeGuardExceeded, "coherence sweep needs 2 <= n <= 10");
    CoherenceSweepResult res;
    for (Index t = 0; t < cfg.trials; ++t) {
        CoherenceInstance inst = draw_coherence_instance(cfg, t);
        CoherenceRecord& rec = inst.record;
        rec.k_admitted =
            admitted_sparsity(inst.coherence, linalg::numerical_rank(inst.Phi), std::min(k_cap, rec.n));
        for_each_small_signal(rec.n, rec.k_admitted, [&](const Vector& x) {
            ++rec.signals;
            bool ok = false;
            try {
                ok = exact_recovery(l1_unit_columns(inst.Phi, inst.Phi * x).x0, x);
            } catch (const Error&) {
            }
            rec.counterexamples += ok ? 0 : 1;
        });
        res.signals += rec.signals;
        res.counterexamples += rec.counterexamples;
        res.redraws += rec.redraws;
        res.records.push_back(rec);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Rank check

struct RankRecord {
    Index trial = 0;
    Index m = 0;
    Index rank = 0;
    bool full = false;  // rank == min(m d_y, n)
};

/// Numerical rank of O for A = scale * H H^T, Gaussian C and the configured schedule.
inline std::vector<RankRecord> run_rank_check(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<RankRecord> out;
    const double scale = cfg.wishart_scale > 0.0 ? cfg.wishart_scale : 1.0 / (4.0 * static_cast<double>(cfg.n));
    for (Index m : phase_grid(cfg)) {
        for (Index t = 0; t < cfg.trials; ++t) {
            Rng rng(cfg.seed, trial_stream(static_cast<std::uint64_t>(m) | (1ULL << 20), static_cast<std::uint64_t>(t)));
            const LtiSystem sys(scale * sample_wishart_A(cfg.n, rng), sample_gaussian(cfg.d_y, cfg.n, rng));
            const ObservationSchedule sched = cfg.schedule == SchedulePolicy::Successive
                                                  ? ObservationSchedule::successive(m)
                                                  : random_distinct_times(m, cfg.t_max, rng);
            RankRecord rec;
            rec.trial = t;
            rec.m = m;
            if (cfg.precision == Precision::Extended) {
                const auto O = observability_matrix<long double>(sys, sched);
                Eigen::JacobiSVD<MatrixT<long double>> svd(O);
                rec.rank = linalg::rank_from_singular_values(svd.singularValues().template cast<double>(), O.rows(),
                                                             O.cols(), effective_rank_eps(cfg));
            } else {
                rec.rank = linalg::numerical_rank(observability_matrix(sys, sched), effective_rank_eps(cfg));
            }
            rec.full = rec.rank == std::min(m * cfg.d_y, cfg.n);
            out.push_back(rec);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive collection

struct AdaptiveOptions {
    CheckerKind checker = CheckerKind::Coherence;
    Index K = 1;
    std::int64_t t_max = 64;
    Index check_every = 1;
    double drop_probability = 0.0;
    std::uint64_t seed = 0;
};

struct AdaptiveStep {
    Index m = 0;
    std::int64_t t = 0;
    double value = 0.0;  // M, worst_c or rank depending on the checker
    bool holds = false;
};

struct AdaptiveResult {
    ObservationSchedule schedule;
    RecoveryReport report;
    bool condition_met = false;
    std::vector<AdaptiveStep> trace;
};

/// Collects observations one time step at a time (each instant dropped with
/// `drop_probability`) and evaluates the chosen condition on O B after every
/// `check_every` new observations. l1 runs once the condition holds, or on all
/// collected data when t_max is reached first (flagged by condition_met = false).
inline AdaptiveResult adaptive_collect(const LtiSystem& sys, const Vector& x0, const AdaptiveOptions& opt) {
    detail::require(opt.t_max >= 0 && opt.t_max <= 128, ErrorCode::SizeGuardExceeded, "t_max is limited to 128");
    detail::require(opt.check_every >= 1, ErrorCode::InvalidArgument, "check_every must be >= 1");
    detail::require(opt.K >= 1 && opt.K < sys.n(), ErrorCode::InvalidArgument, "K must satisfy 1 <= K < n");
    detail::require(x0.size() == sys.n(), ErrorCode::DimensionMismatch, "x0 dimension differs from n");
    detail::require(opt.drop_probability >= 0.0 && opt.drop_probability < 1.0, ErrorCode::InvalidArgument,
                    "drop_probability must lie in [0, 1)");
    Rng rng(opt.seed, trial_stream(4, 0));
    const Index n = sys.n();

    auto evaluate = [&](const Matrix& Phi) -> std::pair<double, bool> {
        switch (opt.checker) {
            case CheckerKind::Coherence: {
                const CoherenceResult coh = mutual_coherence(Phi);
                return {coh.M, admitted_sparsity(coh, linalg::numerical_rank(Phi), n) >= opt.K};
            }
            case CheckerKind::NullSpace: {
                const NullSpaceResult ns = null_space_condition(Phi, opt.K);
                return {ns.worst_c, ns.holds};
            }
            case CheckerKind::RankOnly: {
                const Index r = linalg::numerical_rank(Phi);
                return {static_cast<double>(r), r == n};
            }
        }
        return {0.0, false};
    };

    std::vector<std::int64_t> times;
    AdaptiveResult out;
    Index since_check = 0;
    for (std::int64_t t = 0; t <= opt.t_max; ++t) {
        if (opt.drop_probability > 0.0 && rng.uniform() < opt.drop_probability) continue;
        times.push_back(t);
        if (++since_check < opt.check_every) continue;
        since_check = 0;
        const ObservationSchedule sched(times);
        const auto [value, holds] = evaluate(observability_matrix(sys, sched) * sys.B());
        out.trace.push_back({sched.m(), t, value, holds});
        if (holds) {
            out.condition_met = true;
            break;
        }
    }
    detail::require(!times.empty(), ErrorCode::ConditionNeverMet, "no observation was available");
    out.schedule = ObservationSchedule(times);
    const Matrix Phi = observability_matrix(sys, out.schedule) * sys.B();
    const Vector y = simulate_outputs(sys, x0, out.schedule);
    out.report = opt.checker == CheckerKind::Coherence ? l1_unit_columns(Phi, y) : l1_recover(Phi, y);
    out.report.x0 = sys.B() * out.report.estimate.dense();
    out.report.diagnostics["condition_met"] = out.condition_met ? 1.0 : 0.0;
    return out;
}

}  // namespace sparseobs

#endif  // SPARSEOBS_EXPERIMENTS_HPP
