// SPDX-License-Identifier: MIT
//
// Rank selection from the residual curve, component matching, and the
// increasing-F stability check.

#include <gtest/gtest.h>

#include "migsys/selection.hpp"
#include "migsys/synth.hpp"
#include "oracles.hpp"

using namespace migsys;

namespace {

RankCurve curve_of(std::initializer_list<double> residuals) {
    RankCurve c;
    int F = 1;
    for (double r : residuals) {
        RankPoint p;
        p.F = F++;
        p.relative_residual = r;
        c.entries.push_back(p);
    }
    return c;
}

FitOptions fast_opts(std::uint64_t seed = 1) {
    FitOptions o;
    o.seed = seed;
    o.restarts = 3;
    o.max_outer_iters = 400;
    return o;
}

}  // namespace

// ---- select_rank ------------------------------------------------------------

TEST(SelectRank, HandCurve) {
    EXPECT_EQ(select_rank(curve_of({0.5, 0.2, 0.05, 0.049, 0.048}), 0.01), 3);
}

TEST(SelectRank, FlatCurveSelectsOne) {
    EXPECT_EQ(select_rank(curve_of({0.3, 0.299, 0.2995, 0.299}), 0.01), 1);
}

TEST(SelectRank, SteepCurveFallsBackToMax) {
    EXPECT_EQ(select_rank(curve_of({0.9, 0.7, 0.5, 0.3, 0.1}), 0.01), 5);
}

TEST(SelectRank, SingleEntryCurve) {
    EXPECT_EQ(select_rank(curve_of({0.4}), 0.01), 1);
}

TEST(SelectRank, EmptyCurveRejected) {
    EXPECT_THROW(select_rank(RankCurve{}, 0.01), std::invalid_argument);
}

TEST(SelectRank, InvariantToAppendingSmallImprovements) {
    RankCurve c = curve_of({0.5, 0.2, 0.05, 0.049});
    const int before = select_rank(c, 0.01);
    RankPoint extra;
    extra.F = 5;
    extra.relative_residual = 0.0485;
    c.entries.push_back(extra);
    EXPECT_EQ(select_rank(c, 0.01), before);
}

// ---- match_components ----------------------------------------------------------

TEST(MatchComponents, RecoversPermutation) {
    const FactorModel m = normalize(oracle::random_model(6, 6, 5, 4, 3));
    const std::vector<int> perm = {2, 0, 3, 1};
    const FactorModel shuffled = reorder_components(m, perm);
    const ComponentMatching match = match_components(m, shuffled);
    ASSERT_EQ(match.pairs.size(), 4u);
    for (const auto& p : match.pairs) {
        EXPECT_NEAR(p.congruence, 1.0, 1e-12);
        EXPECT_EQ(perm[p.to], p.from);  // column p.to of `shuffled` is column perm[p.to] of m
    }
}

TEST(MatchComponents, NoiseColumnScoresLow) {
    FactorModel m = normalize(oracle::random_model(30, 30, 20, 3, 5));
    FactorModel q = m;
    std::mt19937_64 gen(77);
    for (int r = 0; r < 30; ++r) q.A(r, 1) = uniform53(gen);
    for (int r = 0; r < 30; ++r) q.B(r, 1) = uniform53(gen);
    for (int r = 0; r < 20; ++r) q.C(r, 1) = uniform53(gen);
    const ComponentMatching match = match_components(m, q);
    for (const auto& p : match.pairs) {
        if (p.from == 1)
            EXPECT_LT(p.congruence, 0.9);  // replaced by independent noise
        else
            EXPECT_NEAR(p.congruence, 1.0, 1e-12);
    }
}

TEST(MatchComponents, SymmetricTotalScore) {
    const FactorModel p = oracle::random_model(5, 5, 4, 3, 8);
    const FactorModel q = oracle::random_model(5, 5, 4, 3, 9);
    const double pq = match_components(p, q).total_congruence;
    const double qp = match_components(q, p).total_congruence;
    EXPECT_NEAR(pq, qp, 1e-12);
}

TEST(MatchComponents, DimensionMismatchRejected) {
    const FactorModel p = oracle::random_model(5, 5, 4, 2, 1);
    const FactorModel q = oracle::random_model(6, 5, 4, 2, 1);
    EXPECT_THROW(match_components(p, q), std::invalid_argument);
}

TEST(MatchComponents, RankSixVsRankEightOnPlantedData) {
    PlantSpec spec;
    spec.I = spec.J = 12;
    spec.K = 8;
    spec.F = 6;
    spec.origin_support = 2;
    spec.dest_support = 2;
    spec.overlap_allowed = false;
    spec.seed = 17;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 18);

    FitOptions opts = fast_opts(3);
    opts.F = 6;
    const FitResult at6 = fit(X, mask, opts);
    opts.F = 8;
    const FitResult at8 = fit(X, mask, opts);
    const ComponentMatching match = match_components(at6.model, at8.model);
    ASSERT_EQ(match.pairs.size(), 6u);
    for (const auto& p : match.pairs) EXPECT_GE(p.congruence, 0.95);
}

// ---- rank_scan ------------------------------------------------------------------

TEST(RankScan, PlantedRank3Knee) {
    PlantSpec spec;
    spec.I = spec.J = 10;
    spec.K = 6;
    spec.F = 3;
    spec.origin_support = 3;
    spec.dest_support = 3;
    spec.seed = 23;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 24);

    const RankCurve curve = rank_scan(X, mask, 4, fast_opts(2));
    ASSERT_EQ(curve.entries.size(), 4u);
    EXPECT_GT(curve.entries[1].relative_residual, 0.05);  // r(2) clearly off
    EXPECT_LT(curve.entries[2].relative_residual, 1e-6);  // r(3) essentially exact
    EXPECT_EQ(select_rank(curve, 0.01), 3);
}

TEST(RankScan, NonIncreasingUpToTolerance) {
    const Tensor3 X = oracle::random_tensor(8, 8, 5, 303, 6.0);
    const Mask mask = Mask::diagonal_off(8, 8, 5);
    const RankCurve curve = rank_scan(X, mask, 5, fast_opts(4));
    for (std::size_t i = 0; i + 1 < curve.entries.size(); ++i)
        EXPECT_LE(curve.entries[i + 1].relative_residual,
                  curve.entries[i].relative_residual + 1e-6);
}

TEST(RankScan, SingleEntryForFmax1) {
    const Tensor3 X = oracle::random_tensor(5, 5, 3, 11, 2.0);
    const RankCurve curve = rank_scan(X, Mask::diagonal_off(5, 5, 3), 1, fast_opts());
    ASSERT_EQ(curve.entries.size(), 1u);
    EXPECT_EQ(curve.entries[0].F, 1);
}

TEST(RankScan, ResidualDefinitionHolds) {
    const Tensor3 X = oracle::random_tensor(6, 6, 4, 41, 3.0);
    const Mask mask = Mask::diagonal_off(6, 6, 4);
    std::vector<FitResult> fits;
    const RankCurve curve = rank_scan(X, mask, 3, fast_opts(6), &fits);
    const double data_norm = apply_mask(mask, X).frobenius_norm();
    ASSERT_EQ(fits.size(), curve.entries.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const double direct = masked_residual(X, fits[i].model, mask) / data_norm;
        EXPECT_NEAR(curve.entries[i].relative_residual, direct, 1e-12);
    }
}

// ---- stability_check ---------------------------------------------------------------

TEST(StabilityCheck, PlantedDataStable) {
    PlantSpec spec;
    spec.I = spec.J = 10;
    spec.K = 6;
    spec.F = 3;
    spec.origin_support = 3;
    spec.dest_support = 3;
    spec.seed = 31;
    const FactorModel truth = plant_model(spec);
    auto [X, mask] = synth_tensor(truth, 0.0, 32);

    const auto matchings = stability_check(X, mask, 3, 2, fast_opts(5));
    ASSERT_EQ(matchings.size(), 2u);
    for (const auto& match : matchings) {
        ASSERT_EQ(match.pairs.size(), 3u);
        for (const auto& p : match.pairs) EXPECT_GE(p.congruence, 0.95);
    }
}

TEST(StabilityCheck, PureNoiseIsUnstable) {
    // Monte Carlo: on unstructured tensors, matched congruence is usually low.
    int low = 0, total = 0;
    for (int seed = 0; seed < 10; ++seed) {
        const Tensor3 X = oracle::random_tensor(10, 10, 6, 9000 + seed, 1.0);
        FitOptions o = fast_opts(seed);
        o.restarts = 2;
        o.max_outer_iters = 150;
        const auto matchings = stability_check(X, Mask::diagonal_off(10, 10, 6), 3, 1, o);
        for (const auto& p : matchings[0].pairs) {
            ++total;
            if (p.congruence < 0.8) ++low;
        }
    }
    EXPECT_GT(low, total / 2);  // typically unstable
}

TEST(StabilityCheck, RejectsZeroDf) {
    const Tensor3 X = oracle::random_tensor(5, 5, 4, 1, 1.0);
    EXPECT_THROW(stability_check(X, Mask::diagonal_off(5, 5, 4), 2, 0, fast_opts()),
                 std::invalid_argument);
}
