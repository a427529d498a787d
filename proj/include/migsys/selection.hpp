// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "migsys/solver.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Rank selection from the residual curve, and component matching for the
// stability check (does increasing F change the leading communities?).
// ---------------------------------------------------------------------------

struct RankPoint {
    int F = 0;
    double relative_residual = 0.0;  ///< best masked residual / ||W o X||_F
    std::uint64_t best_seed = 0;
};

struct RankCurve {
    std::vector<RankPoint> entries;  ///< F strictly increasing
};

struct ComponentPair {
    int from = 0;        ///< component index in the first model
    int to = 0;          ///< component index in the second model
    double congruence = 0.0;
};

struct ComponentMatching {
    std::vector<ComponentPair> pairs;  ///< injective, one per matched component
    double total_congruence = 0.0;
    bool exhaustive = true;            ///< false when the greedy fallback was used
};

/// |cos| similarity; zero vectors score 0.
inline double abs_cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::abs(u.dot(v)) / (nu * nv);
}

/// Congruence of two components: product of the absolute cosine
/// similarities of their (a, b, c) columns.
inline double component_congruence(const FactorModel& p, int fp, const FactorModel& q, int fq) {
    return abs_cosine(p.A.col(fp), q.A.col(fq)) * abs_cosine(p.B.col(fp), q.B.col(fq)) *
           abs_cosine(p.C.col(fp), q.C.col(fq));
}

namespace detail {

inline void match_exhaustive(const Eigen::MatrixXd& S, int small, int large, bool p_is_small,
                             std::vector<int>& cur, std::vector<bool>& used, double cur_sum,
                             std::vector<int>& best, double& best_sum) {
    const int depth = static_cast<int>(cur.size());
    if (depth == small) {
        if (cur_sum > best_sum) {
            best_sum = cur_sum;
            best = cur;
        }
        return;
    }
    for (int j = 0; j < large; ++j) {
        if (used[j]) continue;
        used[j] = true;
        cur.push_back(j);
        const double s = p_is_small ? S(depth, j) : S(j, depth);
        match_exhaustive(S, small, large, p_is_small, cur, used, cur_sum + s, best, best_sum);
        cur.pop_back();
        used[j] = false;
    }
}

}  // namespace detail

/// Optimal injective assignment between components of two models sharing the
/// same (I, J, K) space, maximizing total congruence. Exhaustive for
/// min(F) <= 8 (and at most ~1e7 candidate assignments); greedy otherwise.
inline ComponentMatching match_components(const FactorModel& p, const FactorModel& q) {
    if (!p.dims_consistent() || !q.dims_consistent())
        throw std::invalid_argument("match_components: inconsistent model dimensions");
    if (!p.same_space(q))
        throw std::invalid_argument("match_components: models live in different spaces");
    const int Fp = p.components(), Fq = q.components();
    Eigen::MatrixXd S(Fp, Fq);
    for (int a = 0; a < Fp; ++a)
        for (int b = 0; b < Fq; ++b) S(a, b) = component_congruence(p, a, q, b);

    const int small = std::min(Fp, Fq), large = std::max(Fp, Fq);
    const bool p_is_small = Fp <= Fq;

    double n_assignments = 1.0;
    for (int d = 0; d < small; ++d) n_assignments *= static_cast<double>(large - d);
    ComponentMatching out;
    std::vector<int> assignment;

    if (small <= 8 && n_assignments <= 1e7) {
        std::vector<int> cur;
        std::vector<bool> used(large, false);
        double best_sum = -1.0;
        detail::match_exhaustive(S, small, large, p_is_small, cur, used, 0.0, assignment,
                                 best_sum);
        out.exhaustive = true;
    } else {
        // Greedy: repeatedly take the best remaining pair.
        assignment.assign(small, -1);
        std::vector<bool> used_small(small, false), used_large(large, false);
        for (int step = 0; step < small; ++step) {
            int bi = -1, bj = -1;
            double best = -1.0;
            for (int a = 0; a < small; ++a) {
                if (used_small[a]) continue;
                for (int b = 0; b < large; ++b) {
                    if (used_large[b]) continue;
                    const double s = p_is_small ? S(a, b) : S(b, a);
                    if (s > best) {
                        best = s;
                        bi = a;
                        bj = b;
                    }
                }
            }
            used_small[bi] = true;
            used_large[bj] = true;
            assignment[bi] = bj;
        }
        out.exhaustive = false;
    }

    for (int a = 0; a < small; ++a) {
        ComponentPair pr;
        pr.from = p_is_small ? a : assignment[a];
        pr.to = p_is_small ? assignment[a] : a;
        pr.congruence = S(pr.from, pr.to);
        out.pairs.push_back(pr);
        out.total_congruence += pr.congruence;
    }
    return out;
}

/// Fit F = 1..F_max independently and record the best relative residual per
/// F. `results` (optional) receives the per-F FitResult for inspection.
inline RankCurve rank_scan(const Tensor3& X, const Mask& mask, int F_max, FitOptions opts,
                           std::vector<FitResult>* results = nullptr) {
    if (F_max < 1) throw std::invalid_argument("rank_scan: F_max must be >= 1");
    const Tensor3 Xm = apply_mask(mask, X);
    const double data_norm = Xm.frobenius_norm();
    RankCurve curve;
    for (int F = 1; F <= F_max; ++F) {
        opts.F = F;
        FitResult r = fit(X, mask, opts);
        RankPoint pt;
        pt.F = F;
        pt.relative_residual =
            data_norm > 0.0 ? r.loss_trace.back() / data_norm : 0.0;
        pt.best_seed = r.seed_used;
        curve.entries.push_back(pt);
        if (results) results->push_back(std::move(r));
    }
    return curve;
}

/// Elbow rule: smallest F such that every subsequent consecutive residual
/// improvement r(G) - r(G+1), G >= F, is below tau; F_max if none.
inline int select_rank(const RankCurve& curve, double tau = 0.01) {
    if (curve.entries.empty()) throw std::invalid_argument("select_rank: empty curve");
    const int n = static_cast<int>(curve.entries.size());
    for (int idx = 0; idx < n; ++idx) {
        bool flat = true;
        for (int g = idx; g + 1 < n; ++g) {
            if (curve.entries[g].relative_residual - curve.entries[g + 1].relative_residual >=
                tau) {
                flat = false;
                break;
            }
        }
        if (flat) return curve.entries[idx].F;
    }
    return curve.entries.back().F;
}

/// Fit at F and at F+1..F+dF, matching each larger model against the rank-F
/// model. Supports the "further increasing F does not change the leading
/// communities" stability claim.
inline std::vector<ComponentMatching> stability_check(const Tensor3& X, const Mask& mask, int F,
                                                      int dF, FitOptions opts,
                                                      std::vector<FitResult>* results = nullptr) {
    if (F < 1) throw std::invalid_argument("stability_check: F must be >= 1");
    if (dF < 1) throw std::invalid_argument("stability_check: dF must be >= 1");
    opts.F = F;
    FitResult base = fit(X, mask, opts);
    if (results) results->push_back(base);
    std::vector<ComponentMatching> out;
    for (int d = 1; d <= dF; ++d) {
        opts.F = F + d;
        FitResult larger = fit(X, mask, opts);
        out.push_back(match_components(base.model, larger.model));
        if (results) results->push_back(std::move(larger));
    }
    return out;
}

}  // namespace migsys
