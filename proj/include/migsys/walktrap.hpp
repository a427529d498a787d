// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsys/io.hpp"
#include "migsys/registry.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Walktrap community detection (Pons & Latapy) on aggregated flow matrices:
// vertices are compared through their t-step random-walk probability
// profiles, communities merged agglomeratively by the Ward-style merge cost,
// and the best level chosen by weighted modularity.
// ---------------------------------------------------------------------------

struct WeightedGraph {
    Eigen::MatrixXd W;  ///< symmetric, nonnegative, zero diagonal
    int size() const { return static_cast<int>(W.rows()); }
};

struct Merge {
    int a = 0, b = 0;        ///< merged community ids (b absorbed into the new id)
    int into = 0;            ///< id of the merged community
    double delta_sigma = 0;  ///< Ward merge cost
};

struct Dendrogram {
    int n = 0;
    std::vector<Merge> merges;
    /// level_labels[L] = canonical community label per node after L merges
    /// (labels numbered by first occurrence in node order, starting at 0).
    std::vector<std::vector<int>> level_labels;
    std::vector<double> level_modularity;
    std::vector<int> level_communities;
};

struct GraphPartition {
    std::vector<int> labels;  ///< node -> community in 1..communities
    int communities = 0;
    double modularity = 0.0;
};

/// Undirected graph from a directed flow matrix: W + W^T with zero diagonal.
inline WeightedGraph symmetrize(const Eigen::MatrixXd& W) {
    if (W.rows() != W.cols()) throw std::invalid_argument("symmetrize: matrix must be square");
    if ((W.array() < 0).any())
        throw std::invalid_argument("symmetrize: weights must be nonnegative");
    WeightedGraph g;
    g.W = W + W.transpose();
    g.W.diagonal().setZero();
    return g;
}

/// Newman weighted modularity of a labelled partition:
/// Q = sum_c [ e_c/(2m) - (K_c/(2m))^2 ] with 2m the total (double-counted)
/// edge weight, e_c the double-counted within-community weight, and K_c the
/// community's total degree. Zero-weight graphs score 0.
inline double modularity(const Eigen::MatrixXd& W, const std::vector<int>& labels) {
    const int n = static_cast<int>(W.rows());
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("modularity: label count does not match graph");
    const double two_m = W.sum();
    if (two_m == 0.0) return 0.0;
    int c_max = 0;
    for (int l : labels) c_max = std::max(c_max, l);
    std::vector<double> within(c_max + 1, 0.0), degree(c_max + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            degree[labels[i]] += W(i, j);
            if (labels[i] == labels[j]) within[labels[i]] += W(i, j);
        }
    }
    double q = 0.0;
    for (int c = 0; c <= c_max; ++c) {
        const double frac = degree[c] / two_m;
        q += within[c] / two_m - frac * frac;
    }
    return q;
}

/// Pairwise walktrap distances r_ij = sqrt(sum_k (P^t_ik - P^t_jk)^2 / d_k)
/// between single vertices (zero-degree axes skipped).
inline Eigen::MatrixXd walk_distance_matrix(const WeightedGraph& g, int t = 4) {
    if (t < 1) throw std::invalid_argument("walk_distance_matrix: t must be >= 1");
    const int n = g.size();
    const Eigen::VectorXd d = g.W.rowwise().sum();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (d(i) > 0.0)
            P.row(i) = g.W.row(i) / d(i);
        else
            P(i, i) = 1.0;  // isolates stay put; they never merge anyway
    }
    Eigen::MatrixXd Pt = P;
    for (int s = 1; s < t; ++s) Pt = Pt * P;

    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                if (d(k) <= 0.0) continue;
                const double diff = Pt(i, k) - Pt(j, k);
                s += diff * diff / d(k);
            }
            R(i, j) = R(j, i) = std::sqrt(s);
        }
    return R;
}

/// Agglomerative walktrap: merge the adjacent community pair with minimal
/// Ward cost Delta-sigma = (|C1||C2| / (|C1|+|C2|)) * r^2(C1,C2) / n until
/// only non-adjacent communities remain, recording modularity per level.
/// Isolates stay singletons; components merge independently.
inline Dendrogram walktrap(const WeightedGraph& g, int t = 4) {
    if (t < 1) throw std::invalid_argument("walktrap: t must be >= 1");
    const int n = g.size();
    const Eigen::VectorXd d = g.W.rowwise().sum();

    Dendrogram den;
    den.n = n;

    auto canonical = [&](const std::vector<int>& community_of) {
        std::vector<int> canon(n, -1), remap(2 * n, -1);
        int next = 0;
        for (int i = 0; i < n; ++i) {
            int& m = remap[community_of[i]];
            if (m < 0) m = next++;
            canon[i] = m;
        }
        return canon;
    };

    std::vector<int> community_of(n);
    for (int i = 0; i < n; ++i) community_of[i] = i;

    // Level 0: singletons.
    den.level_labels.push_back(canonical(community_of));
    den.level_modularity.push_back(modularity(g.W, den.level_labels.back()));
    den.level_communities.push_back(n);
    if (g.W.sum() == 0.0) return den;  // no edges: everything stays a singleton

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (d(i) > 0.0)
            P.row(i) = g.W.row(i) / d(i);
        else
            P(i, i) = 1.0;
    }
    Eigen::MatrixXd Pt = P;
    for (int s = 1; s < t; ++s) Pt = Pt * P;

    // Community state, ids 0..n-1 then n+merge#.
    const int max_comms = 2 * n;
    Eigen::MatrixXd profile(max_comms, n);
    profile.topRows(n) = Pt;
    std::vector<double> size(max_comms, 0.0);
    std::vector<bool> alive(max_comms, false);
    std::vector<std::vector<int>> members(max_comms);
    std::vector<std::set<int>> adj(max_comms);
    for (int i = 0; i < n; ++i) {
        size[i] = 1.0;
        alive[i] = true;
        members[i] = {i};
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (g.W(i, j) > 0.0) {
                adj[i].insert(j);
                adj[j].insert(i);
            }

    auto delta_sigma = [&](int a, int b) {
        double r2 = 0.0;
        for (int k = 0; k < n; ++k) {
            if (d(k) <= 0.0) continue;
            const double diff = profile(a, k) - profile(b, k);
            r2 += diff * diff / d(k);
        }
        return (size[a] * size[b]) / (size[a] + size[b]) * r2 / static_cast<double>(n);
    };

    struct Cand {
        double cost;
        int a, b;  // a < b
        bool operator>(const Cand& o) const {
            if (cost != o.cost) return cost > o.cost;
            if (a != o.a) return a > o.a;
            return b > o.b;
        }
    };
    std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> heap;
    for (int i = 0; i < n; ++i)
        for (int j : adj[i])
            if (i < j) heap.push({delta_sigma(i, j), i, j});

    int next_id = n;
    while (!heap.empty()) {
        const Cand top = heap.top();
        heap.pop();
        if (!alive[top.a] || !alive[top.b]) continue;  // stale entry

        const int a = top.a, b = top.b, c = next_id++;
        alive[a] = alive[b] = false;
        alive[c] = true;
        profile.row(c) = (size[a] * profile.row(a) + size[b] * profile.row(b)) /
                         (size[a] + size[b]);
        size[c] = size[a] + size[b];
        members[c] = members[a];
        members[c].insert(members[c].end(), members[b].begin(), members[b].end());
        for (int node : members[c]) community_of[node] = c;
        for (int x : adj[a])
            if (x != b && alive[x]) adj[c].insert(x);
        for (int x : adj[b])
            if (x != a && alive[x]) adj[c].insert(x);
        for (int x : adj[c]) {
            adj[x].erase(a);
            adj[x].erase(b);
            adj[x].insert(c);
            heap.push({delta_sigma(std::min(x, c), std::max(x, c)), std::min(x, c),
                       std::max(x, c)});
        }

        den.merges.push_back({a, b, c, top.cost});
        den.level_labels.push_back(canonical(community_of));
        den.level_modularity.push_back(modularity(g.W, den.level_labels.back()));
        den.level_communities.push_back(den.level_communities.back() - 1);
    }
    return den;
}

/// The dendrogram level maximizing modularity; ties go to fewer communities.
inline GraphPartition best_partition(const Dendrogram& den) {
    if (den.level_labels.empty()) throw std::invalid_argument("best_partition: empty dendrogram");
    int best = 0;
    for (int l = 1; l < static_cast<int>(den.level_labels.size()); ++l) {
        if (den.level_modularity[l] > den.level_modularity[best] ||
            (den.level_modularity[l] == den.level_modularity[best] &&
             den.level_communities[l] < den.level_communities[best]))
            best = l;
    }
    GraphPartition part;
    part.communities = den.level_communities[best];
    part.modularity = den.level_modularity[best];
    part.labels.resize(den.n);
    for (int i = 0; i < den.n; ++i) part.labels[i] = den.level_labels[best][i] + 1;
    return part;
}

// ---------------------------------------------------------------------------
// Pre/post comparison pipeline: aggregate flows strictly before and strictly
// after the split period (the split period itself is excluded from both
// sides), run symmetrize -> walktrap -> best_partition on each, and report
// per-node communities plus the community containing a focal node.
// ---------------------------------------------------------------------------

struct PrePostResult {
    NodeRegistry registry;
    GraphPartition pre;
    GraphPartition post;
    std::vector<std::string> focal_pre_members;   ///< ids sharing the focal node's pre community
    std::vector<std::string> focal_post_members;
};

inline PrePostResult compare_pre_post(const std::vector<FlowRecord>& records,
                                      const PeriodAxis& axis, const std::string& split_label,
                                      const std::string& focal_id, int t = 4) {
    const int split = axis.index_of(split_label);
    if (split == 0 || split == axis.size() - 1)
        throw std::invalid_argument(
            "compare_pre_post: split must leave at least one period on each side");

    PrePostResult res;
    {
        std::vector<std::string> ids;
        for (const auto& r : records) {
            ids.push_back(r.origin);
            ids.push_back(r.dest);
        }
        res.registry = NodeRegistry::from_unsorted(std::move(ids));
    }
    if (!res.registry.contains(focal_id))
        throw std::invalid_argument("compare_pre_post: focal id '" + focal_id +
                                    "' not present in the records");

    const Eigen::MatrixXd W_pre =
        aggregate_window(records, axis, res.registry, axis.label(0), axis.label(split - 1));
    const Eigen::MatrixXd W_post = aggregate_window(records, axis, res.registry,
                                                    axis.label(split + 1),
                                                    axis.label(axis.size() - 1));
    if (W_pre.sum() == 0.0)
        throw std::runtime_error("compare_pre_post: no flows before the split");
    if (W_post.sum() == 0.0)
        throw std::runtime_error("compare_pre_post: no flows after the split");

    res.pre = best_partition(walktrap(symmetrize(W_pre), t));
    res.post = best_partition(walktrap(symmetrize(W_post), t));

    const int focal = res.registry.index_of(focal_id);
    for (int i = 0; i < res.registry.size(); ++i) {
        if (res.pre.labels[i] == res.pre.labels[focal])
            res.focal_pre_members.push_back(res.registry.id(i));
        if (res.post.labels[i] == res.post.labels[focal])
            res.focal_post_members.push_back(res.registry.id(i));
    }
    return res;
}

}  // namespace migsys
