// SPDX-License-Identifier: MIT
//
// Masked nonnegative CP solver: initialization, single updates, full fits,
// normalization, and the monotonicity / determinism / mask-indifference
// contracts.

#include <gtest/gtest.h>

#include "migsys/kernels.hpp"
#include "migsys/solver.hpp"
#include "migsys/synth.hpp"
#include "oracles.hpp"

using namespace migsys;

// ---- init_factors -----------------------------------------------------------

TEST(InitFactors, DeterministicPerSeed) {
    const FactorModel a = init_factors(5, 6, 4, 3, 42);
    const FactorModel b = init_factors(5, 6, 4, 3, 42);
    EXPECT_TRUE(a.A == b.A && a.B == b.B && a.C == b.C);
}

TEST(InitFactors, SeedsDiffer) {
    const FactorModel a = init_factors(5, 6, 4, 3, 1);
    const FactorModel b = init_factors(5, 6, 4, 3, 2);
    EXPECT_FALSE(a.A == b.A && a.B == b.B && a.C == b.C);
}

TEST(InitFactors, EntriesInUnitInterval) {
    const FactorModel m = init_factors(10, 9, 8, 4, 7);
    for (const auto* M : {&m.A, &m.B, &m.C}) {
        EXPECT_GE(M->minCoeff(), 0.0);
        EXPECT_LT(M->maxCoeff(), 1.0);
    }
    EXPECT_EQ(m.lambda.minCoeff(), 1.0);
    EXPECT_EQ(m.lambda.maxCoeff(), 1.0);
}

// ---- normalize ----------------------------------------------------------------

TEST(Normalize, HandNormComputation) {
    FactorModel m(3, 2, 2, 1);
    m.A.col(0) << 3, 4, 0;
    m.B.col(0) << 1, 0;
    m.C.col(0) << 0, 1;
    m.lambda(0) = 1.0;
    const FactorModel n = normalize(m);
    EXPECT_DOUBLE_EQ(n.A(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(n.A(1, 0), 0.8);
    EXPECT_DOUBLE_EQ(n.A(2, 0), 0.0);
    EXPECT_DOUBLE_EQ(n.lambda(0), 5.0);
}

TEST(Normalize, Idempotent) {
    const FactorModel m = normalize(oracle::random_model(4, 5, 3, 2, 9));
    const FactorModel n = normalize(m);
    EXPECT_LT((n.A - m.A).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((n.lambda - m.lambda).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, ComposeUnchanged) {
    FactorModel m = oracle::random_model(5, 4, 6, 3, 13);
    m.lambda << 2.0, 0.3, 1.7;
    const Tensor3 before = compose(m);
    const Tensor3 after = compose(normalize(m));
    double num = 0, den = 0;
    for (std::size_t p = 0; p < before.size(); ++p) {
        num += (before.data()[p] - after.data()[p]) * (before.data()[p] - after.data()[p]);
        den += before.data()[p] * before.data()[p];
    }
    EXPECT_LT(std::sqrt(num / den), 1e-10);
}

TEST(Normalize, UnitColumnsAfter) {
    const FactorModel n = normalize(oracle::random_model(6, 6, 5, 4, 21));
    for (int f = 0; f < 4; ++f) {
        EXPECT_NEAR(n.A.col(f).norm(), 1.0, 1e-10);
        EXPECT_NEAR(n.B.col(f).norm(), 1.0, 1e-10);
        EXPECT_NEAR(n.C.col(f).norm(), 1.0, 1e-10);
    }
}

TEST(Normalize, ZeroColumnZeroesLambda) {
    FactorModel m = oracle::random_model(4, 4, 3, 2, 33);
    m.B.col(1).setZero();
    std::vector<std::string> warnings;
    const FactorModel n = normalize(m, &warnings);
    EXPECT_EQ(n.lambda(1), 0.0);
    EXPECT_EQ(n.B.col(1).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(warnings.size(), 1u);
}

// ---- update_factor --------------------------------------------------------------

TEST(UpdateFactor, GroundTruthIsFixedPoint) {
    // exact rank-2 nonnegative data, model at the truth
    FactorModel m(6, 6, 4, 2);
    std::mt19937_64 gen(3);
    for (auto* M : {&m.A, &m.B, &m.C})
        for (int f = 0; f < 2; ++f)
            for (int r = 0; r < M->rows(); ++r)
                (*M)(r, f) = 0.2 + uniform53(gen);
    const Tensor3 X = compose(m);
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    for (int mode : {1, 2, 3}) {
        const Eigen::MatrixXd updated = update_factor(X, mask, m, mode);
        const Eigen::MatrixXd& original = (mode == 1) ? m.A : (mode == 2) ? m.B : m.C;
        EXPECT_LT((updated - original).cwiseAbs().maxCoeff(), 1e-10) << "mode " << mode;
    }
}

TEST(UpdateFactor, NeverIncreasesMaskedResidual) {
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const Tensor3 X = oracle::random_tensor(6, 6, 4, 1000 + trial, 5.0);
        const FactorModel m = init_factors(6, 6, 4, 3, 2000 + trial);
        const int mode = 1 + trial % 3;
        const double before = masked_residual(X, m, mask);
        for (MaskStrategy strat : {MaskStrategy::ExactMasked, MaskStrategy::EmImpute}) {
            FactorModel updated = m;
            const Eigen::MatrixXd T = update_factor(X, mask, m, mode, strat);
            (mode == 1 ? updated.A : mode == 2 ? updated.B : updated.C) = T;
            const double after = masked_residual(X, updated, mask);
            EXPECT_LE(after, before + 1e-9) << "trial " << trial << " mode " << mode;
            EXPECT_GE(T.minCoeff(), 0.0);
        }
    }
}

TEST(UpdateFactor, ExplicitMaskNeverIncreasesResidual) {
    std::mt19937_64 mg(5);
    std::vector<std::uint8_t> w(6 * 6 * 4, 1);
    for (auto& b : w) b = (mg() % 4) != 0;
    const Mask mask = Mask::explicit_mask(6, 6, 4, w);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor3 X = oracle::random_tensor(6, 6, 4, 500 + trial, 5.0);
        const FactorModel m = init_factors(6, 6, 4, 2, 600 + trial);
        const int mode = 1 + trial % 3;
        FactorModel updated = m;
        (mode == 1 ? updated.A : mode == 2 ? updated.B : updated.C) =
            update_factor(X, mask, m, mode);
        EXPECT_LE(masked_residual(X, updated, mask), masked_residual(X, m, mask) + 1e-9);
    }
}

TEST(UpdateFactor, CrossStrategyAgreementOnPlantedProblem) {
    PlantSpec spec;
    spec.I = spec.J = 8;
    spec.K = 5;
    spec.F = 2;
    spec.origin_support = 3;
    spec.dest_support = 3;
    spec.seed = 11;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 12);

    FitOptions opts;
    opts.F = 2;
    opts.seed = 7;
    opts.restarts = 3;
    opts.max_outer_iters = 2000;
    opts.tol = 1e-12;
    opts.mask_strategy = MaskStrategy::ExactMasked;
    const FitResult exact = fit(X, mask, opts);
    opts.mask_strategy = MaskStrategy::EmImpute;
    const FitResult em = fit(X, mask, opts);

    const Tensor3 Xe = compose(exact.model);
    const Tensor3 Xm = compose(em.model);
    double max_diff = 0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int k = 0; k < 5; ++k)
                if (i != j) max_diff = std::max(max_diff, std::abs(Xe(i, j, k) - Xm(i, j, k)));
    EXPECT_LT(max_diff, 1e-4);
}

TEST(UpdateFactor, RejectsNegativeFactors) {
    const Tensor3 X(3, 3, 2);
    FactorModel m = oracle::random_model(3, 3, 2, 1, 4);
    m.A(0, 0) = -0.5;
    EXPECT_THROW(update_factor(X, Mask::diagonal_off(3, 3, 2), m, 1), std::invalid_argument);
}

TEST(UpdateFactor, DegenerateComponentResetToNoise) {
    const Tensor3 X = oracle::random_tensor(4, 4, 3, 8, 2.0);
    FactorModel m = oracle::random_model(4, 4, 3, 2, 9);
    m.B.col(1).setZero();  // kills component 1's Gram column for modes 1 and 3
    std::vector<std::string> warnings;
    const Eigen::MatrixXd A1 = update_factor(X, Mask::diagonal_off(4, 4, 3), m, 1,
                                             MaskStrategy::ExactMasked, &warnings);
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_GT(A1.col(1).minCoeff(), 0.0);   // noise, not zeros
    EXPECT_LT(A1.col(1).maxCoeff(), 2e-3);  // small
}

// ---- fit -------------------------------------------------------------------------

TEST(Fit, PlantedNoiseFreeRank3Recovery) {
    PlantSpec spec;
    spec.I = spec.J = 8;
    spec.K = 6;
    spec.F = 3;
    spec.origin_support = 3;
    spec.dest_support = 3;
    spec.seed = 101;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 102);

    FitOptions opts;
    opts.F = 3;
    opts.seed = 1;
    const FitResult res = fit(X, mask, opts);

    EXPECT_GE(congruence_score(truth, res.model), 0.99);
    const double data_norm = apply_mask(mask, X).frobenius_norm();
    EXPECT_LT(res.loss_trace.back() / data_norm, 1e-6);
}

TEST(Fit, RankOneModelMatchedData) {
    FactorModel truth(7, 7, 5, 1);
    std::mt19937_64 gen(55);
    for (auto* M : {&truth.A, &truth.B, &truth.C})
        for (int r = 0; r < M->rows(); ++r) (*M)(r, 0) = 0.1 + uniform53(gen);
    truth.lambda(0) = 4.0;
    const Tensor3 X = compose(truth);
    const Mask mask = Mask::diagonal_off(7, 7, 5);

    FitOptions opts;
    opts.F = 1;
    const FitResult res = fit(X, mask, opts);
    const double data_norm = apply_mask(mask, X).frobenius_norm();
    EXPECT_LT(res.loss_trace.back() / data_norm, 1e-6);
}

TEST(Fit, DeterministicForFixedOptions) {
    const Tensor3 X = oracle::random_tensor(6, 6, 4, 77, 4.0);
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    FitOptions opts;
    opts.F = 2;
    opts.seed = 5;
    opts.max_outer_iters = 40;
    const FitResult a = fit(X, mask, opts);
    const FitResult b = fit(X, mask, opts);
    ASSERT_EQ(a.loss_trace.size(), b.loss_trace.size());
    for (std::size_t t = 0; t < a.loss_trace.size(); ++t)
        EXPECT_EQ(a.loss_trace[t], b.loss_trace[t]);  // bitwise
    EXPECT_TRUE(a.model.A == b.model.A && a.model.B == b.model.B && a.model.C == b.model.C);
}

TEST(Fit, ThreadedRestartsMatchSequential) {
    const Tensor3 X = oracle::random_tensor(6, 6, 4, 78, 4.0);
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    FitOptions opts;
    opts.F = 2;
    opts.seed = 5;
    opts.restarts = 4;
    opts.max_outer_iters = 30;
    opts.threads = 1;
    const FitResult seq = fit(X, mask, opts);
    opts.threads = 4;
    const FitResult par = fit(X, mask, opts);
    EXPECT_EQ(seq.seed_used, par.seed_used);
    EXPECT_TRUE(seq.model.A == par.model.A && seq.model.B == par.model.B &&
                seq.model.C == par.model.C);
}

TEST(Fit, LossTraceMonotone) {
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 X = oracle::random_tensor(7, 7, 5, 3000 + trial, 8.0);
        const Mask mask = Mask::diagonal_off(7, 7, 5);
        FitOptions opts;
        opts.F = 1 + trial % 4;
        opts.seed = trial;
        opts.restarts = 1;
        opts.max_outer_iters = 60;
        const FitResult res = fit(X, mask, opts);
        for (std::size_t t = 0; t + 1 < res.loss_trace.size(); ++t)
            EXPECT_LE(res.loss_trace[t + 1], res.loss_trace[t] + 1e-9)
                << "trial " << trial << " iteration " << t;
    }
}

TEST(Fit, NonnegativeAndNormalizedResult) {
    const Tensor3 X = oracle::random_tensor(6, 6, 4, 88, 5.0);
    FitOptions opts;
    opts.F = 3;
    opts.max_outer_iters = 50;
    const FitResult res = fit(X, Mask::diagonal_off(6, 6, 4), opts);
    EXPECT_GE(res.model.A.minCoeff(), 0.0);
    EXPECT_GE(res.model.B.minCoeff(), 0.0);
    EXPECT_GE(res.model.C.minCoeff(), 0.0);
    for (int f = 0; f < 3; ++f) {
        if (res.model.lambda(f) == 0.0) continue;
        EXPECT_NEAR(res.model.A.col(f).norm(), 1.0, 1e-10);
        EXPECT_NEAR(res.model.B.col(f).norm(), 1.0, 1e-10);
        EXPECT_NEAR(res.model.C.col(f).norm(), 1.0, 1e-10);
    }
    for (int f = 0; f + 1 < 3; ++f)
        EXPECT_GE(res.model.lambda(f), res.model.lambda(f + 1));  // lambda-sorted
}

TEST(Fit, MaskIndifferenceBitIdentical) {
    // changing only diagonal entries must not change any output bit
    Tensor3 X = oracle::random_tensor(6, 6, 4, 99, 5.0);
    Tensor3 X_poisoned = X;
    for (int d = 0; d < 6; ++d)
        for (int k = 0; k < 4; ++k) X_poisoned(d, d, k) = 1e6;
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    FitOptions opts;
    opts.F = 2;
    opts.seed = 3;
    opts.max_outer_iters = 40;
    const FitResult a = fit(X, mask, opts);
    const FitResult b = fit(X_poisoned, mask, opts);
    EXPECT_TRUE(a.model.A == b.model.A);
    EXPECT_TRUE(a.model.B == b.model.B);
    EXPECT_TRUE(a.model.C == b.model.C);
    EXPECT_TRUE(a.model.lambda == b.model.lambda);
    ASSERT_EQ(a.loss_trace.size(), b.loss_trace.size());
    for (std::size_t t = 0; t < a.loss_trace.size(); ++t)
        EXPECT_EQ(a.loss_trace[t], b.loss_trace[t]);
}

TEST(Fit, RejectsBadInputs) {
    Tensor3 X(4, 4, 3);
    const Mask mask = Mask::diagonal_off(4, 4, 3);
    FitOptions opts;
    opts.F = 2;
    X(0, 1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(fit(X, mask, opts), std::invalid_argument);
    X(0, 1, 0) = -1.0;
    EXPECT_THROW(fit(X, mask, opts), std::invalid_argument);
    X(0, 1, 0) = 1.0;
    opts.F = 12;  // >= min(16, 12, 12)
    EXPECT_THROW(fit(X, mask, opts), std::invalid_argument);
    opts.F = 0;
    EXPECT_THROW(fit(X, mask, opts), std::invalid_argument);
    opts.F = 2;
    EXPECT_THROW(fit(X, Mask::diagonal_off(5, 4, 3), opts), std::invalid_argument);
}

TEST(Fit, ConvergedFlagSetOnEasyProblem) {
    PlantSpec spec;
    spec.I = spec.J = 6;
    spec.K = 4;
    spec.F = 1;
    spec.origin_support = 2;
    spec.dest_support = 2;
    spec.seed = 5;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 6);
    FitOptions opts;
    opts.F = 1;
    const FitResult res = fit(X, mask, opts);
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.iterations_used, static_cast<int>(res.loss_trace.size()) - 1);
}
