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
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sparseobs/experiments.hpp"

namespace sparseobs {
namespace {

ExperimentConfig small_phase() {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.K = 2;
    cfg.trials = 40;
    cfg.m_min = 1;
    cfg.m_max = 8;
    return cfg;
}

TEST(Config, Validation) {
    auto bad = [](auto edit) {
        ExperimentConfig cfg;
        edit(cfg);
        try {
            validate(cfg);
        } catch (const Error& e) {
            return e.code() == ErrorCode::ConfigError;
        }
        return false;
    };
    EXPECT_NO_THROW(validate(ExperimentConfig{}));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.trials = 0; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.K = c.n; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.t_max = 129; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.lambda_min = 3.0; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.drop_probability = 1.0; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) { c.rank_eps = -1.0; }));
    EXPECT_TRUE(bad([](ExperimentConfig& c) {
        c.schedule = SchedulePolicy::RandomDistinct;
        c.t_max = 10;
        c.m_max = 12;
    }));
}

TEST(Config, PhaseGridDefaultsToK) {
    ExperimentConfig cfg;
    cfg.K = 3;
    cfg.m_max = 9;
    cfg.m_step = 3;
    EXPECT_EQ(phase_grid(cfg), (std::vector<Index>{3, 6, 9}));
}

TEST(Config, RankEpsDefaults) {
    ExperimentConfig cfg;
    EXPECT_EQ(effective_rank_eps(cfg), kExtendedRankEps);
    cfg.precision = Precision::Double;
    EXPECT_EQ(effective_rank_eps(cfg), linalg::kRankEps);
    cfg.rank_eps = 1e-9;
    EXPECT_EQ(effective_rank_eps(cfg), 1e-9);
}

TEST(ExactRecovery, Tolerance) {
    const Vector x = Vector::Constant(3, 2.0);
    EXPECT_TRUE(exact_recovery(x + Vector::Constant(3, 2.9e-6), x));
    EXPECT_FALSE(exact_recovery(x + Vector::Constant(3, 3.1e-6), x));
}

TEST(Phase, PointInvariantsAndEndpoints) {
    const std::vector<PhasePoint> pts = run_phase_transition(small_phase());
    ASSERT_EQ(pts.size(), 8u);
    for (const PhasePoint& p : pts) {
        EXPECT_LE(p.successes, p.trials);
        EXPECT_EQ(p.success_rate, static_cast<double>(p.successes) / static_cast<double>(p.trials));
        EXPECT_LE(p.mean_rank, static_cast<double>(p.m));
    }
    // Fewer measurements than nonzeros cannot pin down a generic x0.
    EXPECT_EQ(pts[0].successes, 0);
    // Square generic O is invertible.
    EXPECT_EQ(pts.back().success_rate, 1.0);
    EXPECT_EQ(pts.back().mean_rank, 8.0);
}

TEST(Phase, DoublePrecisionSmallSystem) {
    ExperimentConfig cfg = small_phase();
    cfg.precision = Precision::Double;
    cfg.m_min = 8;
    EXPECT_EQ(run_phase_transition(cfg).front().success_rate, 1.0);
}

TEST(Phase, WrongKindRejected) {
    ExperimentConfig cfg = small_phase();
    cfg.kind = ExperimentKind::RankCheck;
    EXPECT_THROW(run_phase_transition(cfg), Error);
}

TEST(Phase, Reproducible) {
    ExperimentConfig cfg = small_phase();
    cfg.schedule = SchedulePolicy::RandomDistinct;
    cfg.t_max = 32;
    const auto a = run_phase_transition(cfg);
    const auto b = run_phase_transition(cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].successes, b[i].successes);
        EXPECT_EQ(a[i].mean_rank, b[i].mean_rank);
    }
}

TEST(Phase, BasisInvariantStatistics) {
    ExperimentConfig cfg;
    cfg.n = 20;
    cfg.K = 2;
    cfg.trials = 200;
    cfg.m_min = 4;
    cfg.m_max = 10;
    cfg.m_step = 2;
    const auto ident = run_phase_transition(cfg);
    cfg.basis = BasisKind::Random;
    const auto rot = run_phase_transition(cfg);
    for (std::size_t i = 0; i < ident.size(); ++i) {
        const double p = 0.5 * (ident[i].success_rate + rot[i].success_rate);
        const double sigma = std::sqrt(2.0 * p * (1.0 - p) / 200.0);
        EXPECT_LE(std::abs(ident[i].success_rate - rot[i].success_rate), 3.0 * sigma + 1e-12) << "m " << ident[i].m;
    }
}

TEST(Phase, RowPermutationKeepsSuccess) {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 16;
        const LtiSystem sys(sample_wishart_A(n, rng) / (4.0 * n), sample_gaussian(1, n, rng));
        const ObservationSchedule sched = ObservationSchedule::successive(8);
        const Vector x0 = random_sparse_vector(n, 2, rng).dense();
        const Matrix O = observability_matrix(sys, sched);
        const Vector y = O * x0;
        std::vector<Index> perm(8);
        std::iota(perm.begin(), perm.end(), Index{0});
        std::reverse(perm.begin(), perm.end());
        std::swap(perm[1], perm[5]);
        Matrix Op(8, n);
        Vector yp(8);
        for (Index i = 0; i < 8; ++i) {
            Op.row(i) = O.row(perm[static_cast<std::size_t>(i)]);
            yp[i] = y[perm[static_cast<std::size_t>(i)]];
        }
        const Matrix I = Matrix::Identity(n, n);
        EXPECT_EQ(exact_recovery(recover_via_reduction<double>(O, y, I).x0, x0),
                  exact_recovery(recover_via_reduction<double>(Op, yp, I).x0, x0));
    }
}

TEST(Sweeps, PronyExact) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::PronyExact;
    cfg.n = 20;
    cfg.K = 5;
    cfg.trials = 30;
    const SweepResult res = run_prony_sweep(cfg);
    EXPECT_EQ(res.records.size(), 30u);
    EXPECT_GE(res.successes, 29);
    for (const TrialRecord& r : res.records)
        if (r.success) EXPECT_EQ(r.k, 5);
}

TEST(Sweeps, SignAlignedModal) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::L1SignAligned;
    cfg.n = 15;
    cfg.K = 3;
    cfg.trials = 30;
    EXPECT_EQ(run_sign_aligned_sweep(cfg).successes, 30);
}

TEST(Sweeps, SignViolationControlArmRuns) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::L1SignAligned;
    cfg.n = 15;
    cfg.K = 3;
    cfg.trials = 30;
    cfg.sign_violation = true;
    const SweepResult res = run_sign_aligned_sweep(cfg);
    EXPECT_EQ(res.records.size(), 30u);
    EXPECT_LE(res.successes, 30);
}

TEST(Sweeps, RedrawBudgetRespected) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::PronyExact;
    cfg.n = 20;
    cfg.K = 5;
    cfg.trials = 20;
    cfg.max_condition = 1.0;  // never satisfied
    cfg.max_redraws = 2;
    for (const TrialRecord& r : run_prony_sweep(cfg).records) EXPECT_EQ(r.redraws, 2);
}

TEST(Coherence, AdmittedSparsity) {
    CoherenceResult c;
    c.M = 0.0;
    c.sparsity_bound = kInfinity;
    EXPECT_EQ(admitted_sparsity(c, 5, 10), 2);
    c.M = 0.3;
    c.sparsity_bound = 0.5 * (1.0 + 1.0 / 0.3);
    EXPECT_EQ(admitted_sparsity(c, 5, 10), 2);
    EXPECT_EQ(admitted_sparsity(c, 5, 1), 1);
    c.M = 1.0;
    EXPECT_EQ(admitted_sparsity(c, 5, 10), 0);
}

TEST(Coherence, SmallSignalEnumeration) {
    Index count = 0;
    for_each_small_signal(4, 2, [&](const Vector& x) {
        ++count;
        EXPECT_LE((x.array() != 0.0).count(), 2);
    });
    EXPECT_EQ(count, 4 * 4 + 6 * 16);
}

TEST(Coherence, SweepHasNoCounterexamples) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::CoherenceSweep;
    cfg.n = 10;
    cfg.trials = 40;
    const CoherenceSweepResult res = run_coherence_sweep(cfg);
    EXPECT_EQ(res.records.size(), 40u);
    EXPECT_GT(res.signals, 0);
    EXPECT_EQ(res.counterexamples, 0);
    for (const CoherenceRecord& r : res.records) {
        EXPECT_LE(r.n, 10);
        EXPECT_LE(r.m, r.n);
        EXPECT_LT(r.M, 1.0);
    }
}

TEST(Coherence, SizeGuard) {
    ExperimentConfig cfg;
    cfg.n = 11;
    EXPECT_THROW(run_coherence_sweep(cfg), Error);
}

TEST(RankCheck, Records) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::RankCheck;
    cfg.n = 16;
    cfg.K = 1;
    cfg.trials = 10;
    cfg.m_min = 1;
    cfg.m_max = 10;
    const auto recs = run_rank_check(cfg);
    EXPECT_EQ(recs.size(), 100u);
    for (const RankRecord& r : recs) {
        EXPECT_EQ(r.full, r.rank == std::min<Index>(r.m, 16));
        EXPECT_TRUE(r.full) << "m " << r.m;
    }
}

// ---------------------------------------------------------------------------
// adaptive_collect

LtiSystem diagonal(const std::vector<double>& lam) { return make_diagonal_system(lam, std::vector<double>(lam.size(), 1.0)); }

TEST(Adaptive, RankOnlyStopsAtN) {
    const LtiSystem sys = diagonal({0.4, 0.8, 1.2, 1.6, 2.0});
    Vector x0 = Vector::Zero(5);
    x0[2] = 1.0;
    AdaptiveOptions opt;
    opt.checker = CheckerKind::RankOnly;
    const AdaptiveResult r = adaptive_collect(sys, x0, opt);
    EXPECT_TRUE(r.condition_met);
    EXPECT_EQ(r.schedule.m(), 5);
    EXPECT_TRUE(exact_recovery(r.report.x0, x0));
    EXPECT_EQ(r.trace.back().value, 5.0);
}

TEST(Adaptive, CoherenceStopsEarlyOnDiagonalSystem) {
    Rng rng(21);
    int met = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto lam = distinct_uniform(8, 0.3, 2.2, 0.05, rng);
        const LtiSystem sys = diagonal(lam);
        const Vector x0 = random_sparse_vector(8, 1, rng).dense();
        AdaptiveOptions opt;
        opt.K = 1;
        const AdaptiveResult r = adaptive_collect(sys, x0, opt);
        // Two columns of a two-row Vandermonde matrix are never parallel, so the
        // bound admits K = 1 at m = 2 and every earlier check failed.
        const CoherenceResult coh = mutual_coherence(observability_matrix(sys, r.schedule));
        if (!r.condition_met) continue;
        ++met;
        EXPECT_LE(r.schedule.m(), 3);
        EXPECT_TRUE(coh.admits(1));
        EXPECT_TRUE(exact_recovery(r.report.x0, x0));
    }
    EXPECT_EQ(met, 20);
}

TEST(Adaptive, NullSpaceStopsNoLaterThanExhaustiveL1) {
    Rng rng(22);
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 6;
        const LtiSystem sys(sample_wishart_A(n, rng) / (4.0 * n), sample_gaussian(1, n, rng));
        const Vector x0 = random_sparse_vector(n, 1, rng).dense();
        AdaptiveOptions opt;
        opt.checker = CheckerKind::NullSpace;
        opt.K = 1;
        const AdaptiveResult r = adaptive_collect(sys, x0, opt);
        ASSERT_TRUE(r.condition_met);
        Index first_ok = n;
        for (Index m = 1; m <= n; ++m) {
            const Matrix O = observability_matrix(sys, ObservationSchedule::successive(m));
            bool all = true;
            for_each_small_signal(n, 1, [&](const Vector& x) {
                try {
                    all = all && exact_recovery(l1_recover(O, O * x).x0, x);
                } catch (const Error&) {
                    all = false;
                }
            });
            if (all) {
                first_ok = m;
                break;
            }
        }
        EXPECT_LE(r.schedule.m(), first_ok) << "trial " << trial;
    }
}

TEST(Adaptive, CheckEveryAndDrops) {
    const LtiSystem sys = diagonal({0.4, 0.8, 1.2, 1.6, 2.0, 2.2});
    Vector x0 = Vector::Zero(6);
    x0[1] = 2.0;
    AdaptiveOptions opt;
    opt.checker = CheckerKind::RankOnly;
    opt.check_every = 4;
    opt.drop_probability = 0.5;
    opt.seed = 3;
    const AdaptiveResult r = adaptive_collect(sys, x0, opt);
    for (const AdaptiveStep& s : r.trace) EXPECT_EQ(s.m % 4, 0);
    EXPECT_EQ(r.schedule.m(), 8);
    EXPECT_GT(r.schedule.times().back(), 7);
}

TEST(Adaptive, NeverMetIsFlagged) {
    Matrix A = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
    Matrix C(1, 3);
    C << 1, 1, 0;
    const LtiSystem sys(A, C);
    AdaptiveOptions opt;
    opt.checker = CheckerKind::RankOnly;
    opt.t_max = 10;
    const AdaptiveResult r = adaptive_collect(sys, Vector::Unit(3, 0), opt);
    EXPECT_FALSE(r.condition_met);
    EXPECT_EQ(r.report.diagnostics.at("condition_met"), 0.0);
    EXPECT_EQ(r.schedule.m(), 11);
}

TEST(Adaptive, Guards) {
    const LtiSystem sys = diagonal({0.5, 1.5});
    AdaptiveOptions opt;
    opt.t_max = 129;
    EXPECT_THROW(adaptive_collect(sys, Vector::Zero(2), opt), Error);
    opt.t_max = 10;
    opt.K = 2;
    EXPECT_THROW(adaptive_collect(sys, Vector::Zero(2), opt), Error);
}

}  // namespace
}  // namespace sparseobs
