// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsys/model.hpp"
#include "migsys/registry.hpp"
#include "migsys/solver.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Turning a fitted model into deliverables: ranked systems, top-k member
// lists, spatial association matrices, temporal intensity profiles, hard
// partitions, and shock flags.
// ---------------------------------------------------------------------------

enum class Side { Origin, Destination };

struct MemberWeight {
    int index = 0;          ///< dense node index
    std::string id;         ///< external id (empty when no registry given)
    double membership = 0.0;
};

struct CommunityReport {
    int component = 0;                        ///< column index in the model
    int rank_by_lambda = 0;                   ///< 1 = most significant
    double lambda = 0.0;
    std::vector<MemberWeight> top_origins;       ///< non-increasing membership
    std::vector<MemberWeight> top_destinations;
    Eigen::MatrixXd association;              ///< k x k, (i,j) = a~(i) * b~(j)
    Eigen::VectorXd profile;                  ///< lambda_f * c_f
    std::vector<int> shock_flags;             ///< flagged period indices
};

struct Partition {
    Side side = Side::Origin;
    std::vector<int> labels;         ///< node -> community index in 1..F
    int communities = 0;             ///< F of the source model
    std::vector<int> zero_rows;      ///< nodes with all-zero membership rows
};

/// Permutation ordering components by significance (non-increasing lambda;
/// ties by earliest-activity period, then original index). Idempotent when
/// re-applied to the reordered model.
inline std::vector<int> rank_communities(const FactorModel& model) {
    if (!model.dims_consistent())
        throw std::invalid_argument("rank_communities: inconsistent model dimensions");
    return significance_order(model);
}

/// The k largest entries of a_f (origin side) or b_f (destination side),
/// sorted non-increasing, ties by node index. Resolves external ids when a
/// registry is given.
inline std::vector<MemberWeight> top_k_members(const FactorModel& model, int f, int k, Side side,
                                               const NodeRegistry* registry = nullptr) {
    if (f < 0 || f >= model.components())
        throw std::invalid_argument("top_k_members: component index out of range");
    const Eigen::MatrixXd& M = (side == Side::Origin) ? model.A : model.B;
    const int n = static_cast<int>(M.rows());
    if (k < 1 || k > n)
        throw std::invalid_argument("top_k_members: k must be in [1, dimension]");
    if (registry && registry->size() != n)
        throw std::invalid_argument("top_k_members: registry size does not match model");

    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (M(a, f) != M(b, f)) return M(a, f) > M(b, f);
        return a < b;
    });
    std::vector<MemberWeight> out;
    out.reserve(k);
    for (int r = 0; r < k; ++r) {
        MemberWeight w;
        w.index = idx[r];
        w.membership = M(idx[r], f);
        if (registry) w.id = registry->id(idx[r]);
        out.push_back(std::move(w));
    }
    return out;
}

/// k x k spatial association matrix of system f: rows are the top-k
/// origins, columns the top-k destinations, entry (i,j) = a~(i) * b~(j).
/// Rank one by construction.
inline Eigen::MatrixXd spatial_association(const FactorModel& model, int f, int k) {
    const auto orig = top_k_members(model, f, k, Side::Origin);
    const auto dest = top_k_members(model, f, k, Side::Destination);
    Eigen::MatrixXd M(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M(i, j) = orig[i].membership * dest[j].membership;
    return M;
}

/// Scale-bearing temporal profile lambda_f * c_f.
inline Eigen::VectorXd temporal_profile(const FactorModel& model, int f) {
    if (f < 0 || f >= model.components())
        throw std::invalid_argument("temporal_profile: component index out of range");
    return model.lambda(f) * model.C.col(f);
}

// ---------------------------------------------------------------------------
// detect_shock: flag periods whose first difference deviates from the median
// difference by more than z robust standard deviations (MAD * 1.4826).
// A difference between periods t and t+1 is attributed to period t+1; two
// consecutive anomalies with opposite signs describe a single one-period
// excursion and collapse to its apex period.
// ---------------------------------------------------------------------------
inline std::vector<int> detect_shock(const Eigen::VectorXd& profile, double z = 3.0) {
    const int K = static_cast<int>(profile.size());
    if (K < 4) throw std::invalid_argument("detect_shock: profile needs at least 4 periods");
    if (z <= 0) throw std::invalid_argument("detect_shock: z must be positive");

    std::vector<double> diff(K - 1);
    for (int t = 0; t + 1 < K; ++t) diff[t] = profile(t + 1) - profile(t);

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double med = median(diff);
    std::vector<double> absdev(diff.size());
    for (std::size_t t = 0; t < diff.size(); ++t) absdev[t] = std::abs(diff[t] - med);
    const double robust_sd = 1.4826 * median(absdev);
    const double threshold = z * robust_sd;

    std::vector<int> flags;
    int prev_t = -2;
    double prev_dev = 0.0;
    for (int t = 0; t < K - 1; ++t) {
        const double dev = diff[t] - med;
        if (std::abs(dev) <= threshold) continue;
        if (t == prev_t + 1 && dev * prev_dev < 0.0) {
            // fall (or rebound) of the excursion already flagged at period t
            prev_t = -2;  // a third consecutive anomaly starts a new event
            continue;
        }
        flags.push_back(t + 1);
        prev_t = t;
        prev_dev = dev;
    }
    return flags;
}

// ---------------------------------------------------------------------------
// hard_partition: label each node with the argmax of its membership row,
// forcing a full partitioning. All-zero rows go to the largest-lambda
// component and are reported in `zero_rows`. With smooth_k > 0, one
// synchronous pass reassigns each node to the majority label among its
// smooth_k nearest neighbors in membership space (ties keep the current
// label).
// ---------------------------------------------------------------------------
inline Partition hard_partition(const FactorModel& model, Side side, int smooth_k = 0) {
    if (!model.dims_consistent())
        throw std::invalid_argument("hard_partition: inconsistent model dimensions");
    if (smooth_k < 0) throw std::invalid_argument("hard_partition: smooth_k must be >= 0");
    const Eigen::MatrixXd& M = (side == Side::Origin) ? model.A : model.B;
    const int n = static_cast<int>(M.rows());
    const int F = model.components();

    int lambda_argmax = 0;
    for (int f = 1; f < F; ++f)
        if (model.lambda(f) > model.lambda(lambda_argmax)) lambda_argmax = f;

    Partition part;
    part.side = side;
    part.communities = F;
    part.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int f = 1; f < F; ++f)
            if (M(i, f) > M(i, best)) best = f;
        if (M(i, best) == 0.0) {
            part.labels[i] = lambda_argmax + 1;
            part.zero_rows.push_back(i);
        } else {
            part.labels[i] = best + 1;
        }
    }

    if (smooth_k > 0 && n > 1) {
        const int k = std::min(smooth_k, n - 1);
        std::vector<int> smoothed = part.labels;
        for (int i = 0; i < n; ++i) {
            std::vector<std::pair<double, int>> dist;
            dist.reserve(n - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                dist.push_back({(M.row(i) - M.row(j)).norm(), j});
            }
            std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
            std::vector<int> votes(F + 1, 0);
            for (int r = 0; r < k; ++r) ++votes[part.labels[dist[r].second]];
            int winner = part.labels[i];
            for (int lab = 1; lab <= F; ++lab)
                if (votes[lab] > votes[winner]) winner = lab;
            smoothed[i] = winner;
        }
        part.labels = std::move(smoothed);
    }
    return part;
}

/// Full per-system report for component f (0-based) of a ranked model.
inline CommunityReport make_report(const FactorModel& model, int f, int k,
                                   const NodeRegistry* registry = nullptr, double shock_z = 3.0) {
    CommunityReport rep;
    rep.component = f;
    rep.lambda = model.lambda(f);
    const auto order = rank_communities(model);
    for (int r = 0; r < static_cast<int>(order.size()); ++r)
        if (order[r] == f) rep.rank_by_lambda = r + 1;
    rep.top_origins = top_k_members(model, f, k, Side::Origin, registry);
    rep.top_destinations = top_k_members(model, f, k, Side::Destination, registry);
    rep.association = spatial_association(model, f, k);
    rep.profile = temporal_profile(model, f);
    if (model.periods() >= 4) rep.shock_flags = detect_shock(rep.profile, shock_z);
    return rep;
}

}  // namespace migsys
