// SPDX-License-Identifier: MIT
//
// Test-only oracles, written independently of the library kernels they
// check: plain triple loops over (i, j, k), brute-force set-partition
// enumeration for modularity, and small data generators.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "migsys/model.hpp"
#include "migsys/tensor.hpp"

namespace oracle {

/// Triple-loop composition sum_f lambda_f a_f(i) b_f(j) c_f(k).
inline migsys::Tensor3 compose_loop(const migsys::FactorModel& m) {
    migsys::Tensor3 out(m.origins(), m.destinations(), m.periods());
    for (int i = 0; i < m.origins(); ++i)
        for (int j = 0; j < m.destinations(); ++j)
            for (int k = 0; k < m.periods(); ++k) {
                double s = 0.0;
                for (int f = 0; f < m.components(); ++f)
                    s += m.lambda(f) * m.A(i, f) * m.B(j, f) * m.C(k, f);
                out(i, j, k) = s;
            }
    return out;
}

/// Triple-loop masked residual: sqrt of the sum over unmasked cells of the
/// squared difference. `masked(i,j,k)` returns true when the cell is excluded.
inline double masked_residual_loop(const migsys::Tensor3& X, const migsys::FactorModel& m,
                                   const std::function<bool(int, int, int)>& masked) {
    const migsys::Tensor3 Xhat = compose_loop(m);
    double s = 0.0;
    for (int i = 0; i < X.dim0(); ++i)
        for (int j = 0; j < X.dim1(); ++j)
            for (int k = 0; k < X.dim2(); ++k) {
                if (masked(i, j, k)) continue;
                const double r = X(i, j, k) - Xhat(i, j, k);
                s += r * r;
            }
    return std::sqrt(s);
}

/// Triple-loop MTTKRP: mode-1 row i is sum_{j,k} X(i,j,k) B(j,f) C(k,f),
/// and analogously for the other modes.
inline Eigen::MatrixXd mttkrp_loop(const migsys::Tensor3& X, const migsys::FactorModel& m,
                                   int mode) {
    const int I = X.dim0(), J = X.dim1(), K = X.dim2(), F = m.components();
    const int rows = (mode == 1) ? I : (mode == 2) ? J : K;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, F);
    for (int f = 0; f < F; ++f)
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < J; ++j)
                for (int k = 0; k < K; ++k) {
                    if (mode == 1)
                        M(i, f) += X(i, j, k) * m.B(j, f) * m.C(k, f);
                    else if (mode == 2)
                        M(j, f) += X(i, j, k) * m.A(i, f) * m.C(k, f);
                    else
                        M(k, f) += X(i, j, k) * m.A(i, f) * m.B(j, f);
                }
    return M;
}

/// Random tensor with entries uniform in [0, hi).
inline migsys::Tensor3 random_tensor(int I, int J, int K, std::uint64_t seed, double hi = 1.0) {
    migsys::Tensor3 X(I, J, K);
    std::mt19937_64 gen(seed);
    for (auto& v : X.data()) v = hi * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    return X;
}

/// Random nonnegative model with uniform [0,1) factors and lambda = 1.
inline migsys::FactorModel random_model(int I, int J, int K, int F, std::uint64_t seed) {
    migsys::FactorModel m(I, J, K, F);
    std::mt19937_64 gen(seed);
    auto u = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (auto* M : {&m.A, &m.B, &m.C})
        for (int f = 0; f < F; ++f)
            for (int r = 0; r < M->rows(); ++r) (*M)(r, f) = u();
    return m;
}

// ---------------------------------------------------------------------------
// Brute-force maximum modularity: enumerate every set partition of n nodes
// (restricted growth strings) and evaluate Q with an independent formula.
// Feasible for n <= 9 (Bell(9) = 21147).
// ---------------------------------------------------------------------------

inline double modularity_direct(const Eigen::MatrixXd& W, const std::vector<int>& labels) {
    const int n = static_cast<int>(W.rows());
    const double two_m = W.sum();
    if (two_m == 0.0) return 0.0;
    double q = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (labels[i] == labels[j])
                q += W(i, j) / two_m -
                     (W.row(i).sum() / two_m) * (W.row(j).sum() / two_m);
    return q;
}

struct BestPartitionResult {
    std::vector<int> labels;
    double modularity = -1.0;
    int maximizer_count = 0;  ///< number of distinct partitions attaining the max
};

inline BestPartitionResult brute_force_best_partition(const Eigen::MatrixXd& W) {
    const int n = static_cast<int>(W.rows());
    BestPartitionResult best;
    std::vector<int> labels(n, 0);
    // Restricted growth strings: labels[0] = 0, labels[i] <= 1 + max(prefix).
    std::function<void(int, int)> rec = [&](int pos, int max_used) {
        if (pos == n) {
            const double q = modularity_direct(W, labels);
            if (q > best.modularity + 1e-15) {
                best.modularity = q;
                best.labels = labels;
                best.maximizer_count = 1;
            } else if (std::abs(q - best.modularity) <= 1e-15) {
                ++best.maximizer_count;
            }
            return;
        }
        for (int c = 0; c <= max_used + 1; ++c) {
            labels[pos] = c;
            rec(pos + 1, std::max(max_used, c));
        }
    };
    rec(0, -1);
    return best;
}

/// Canonical relabelling by first occurrence in node order (0-based).
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    std::vector<int> remap;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int found = -1;
        for (std::size_t r = 0; r < remap.size(); ++r)
            if (remap[r] == labels[i]) found = static_cast<int>(r);
        if (found < 0) {
            remap.push_back(labels[i]);
            found = static_cast<int>(remap.size()) - 1;
        }
        out[i] = found;
    }
    return out;
}

}  // namespace oracle
