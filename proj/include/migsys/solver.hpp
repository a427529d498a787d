// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "migsys/kernels.hpp"
#include "migsys/model.hpp"
#include "migsys/rng.hpp"
#include "migsys/tensor.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Masked nonnegative CP fit: alternating HALS column sweeps on
//
//     min_{A,B,C >= 0}  || W o (X - sum_f lambda_f a_f o b_f o c_f) ||_F
//
// Two mask strategies:
//   ExactMasked  each row solves its reduced least-squares system, excluding
//                the masked columns of the unfolded data (default; exact for
//                the diagonal mask, which removes few entries per row).
//   EmImpute     masked entries are replaced by the current model's
//                predictions before an unmasked HALS update (for arbitrary
//                missing-data masks).
//
// Every coordinate update is an exact minimizer clipped at zero, so the
// masked objective is non-increasing in both strategies.
// ---------------------------------------------------------------------------

enum class MaskStrategy { ExactMasked, EmImpute };

struct FitOptions {
    int F = 1;                    ///< component count (number of systems)
    int max_outer_iters = 500;
    double tol = 1e-7;            ///< relative loss-change stopping threshold
    int restarts = 5;
    std::uint64_t seed = 0;       ///< restart r uses seed + r
    MaskStrategy mask_strategy = MaskStrategy::ExactMasked;
    int inner_iters = 1;          ///< HALS sweeps per factor per outer iteration
    int threads = 1;              ///< restart-level parallelism only
};

struct FitResult {
    FactorModel model;               ///< normalized, lambda-sorted, best restart
    std::vector<double> loss_trace;  ///< masked residual per outer iteration (entry 0 = at init)
    bool converged = false;
    int iterations_used = 0;
    std::uint64_t seed_used = 0;
    std::vector<std::string> warnings;
};

/// Ordering of components by non-increasing lambda; ties broken by earliest
/// period with activity above 1e-12, then by original index.
inline std::vector<int> significance_order(const FactorModel& model) {
    const int F = model.components();
    const int K = model.periods();
    std::vector<int> first_active(F, K);
    for (int f = 0; f < F; ++f)
        for (int k = 0; k < K; ++k)
            if (model.C(k, f) > 1e-12) {
                first_active[f] = k;
                break;
            }
    std::vector<int> order(F);
    for (int f = 0; f < F; ++f) order[f] = f;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (model.lambda(a) != model.lambda(b)) return model.lambda(a) > model.lambda(b);
        if (first_active[a] != first_active[b]) return first_active[a] < first_active[b];
        return a < b;
    });
    return order;
}

/// Uniform(0,1) factors drawn from std::mt19937_64(seed): A column by
/// column, then B, then C (see rng.hpp for the draw); lambda = 1.
inline FactorModel init_factors(int I, int J, int K, int F, std::uint64_t seed) {
    FactorModel m(I, J, K, F);
    std::mt19937_64 gen(seed);
    for (auto* M : {&m.A, &m.B, &m.C})
        for (int f = 0; f < F; ++f)
            for (int r = 0; r < M->rows(); ++r) (*M)(r, f) = uniform53(gen);
    return m;
}

namespace detail {

constexpr double kDegenerateGram = 1e-150;

// For explicit masks: per mode, per row of that mode, the (u, v) index pairs
// of the other two axes at which the weight is zero. Pair order matches the
// khatri-rao pairing: mode 1 -> (j, k), mode 2 -> (i, k), mode 3 -> (i, j).
struct ZeroColumns {
    std::vector<std::vector<std::array<int, 2>>> rows[3];
};

inline ZeroColumns build_zero_columns(const Mask& mask) {
    ZeroColumns zc;
    const int I = mask.dim0(), J = mask.dim1(), K = mask.dim2();
    zc.rows[0].resize(I);
    zc.rows[1].resize(J);
    zc.rows[2].resize(K);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k)
                if (mask.weight(i, j, k) == 0) {
                    zc.rows[0][i].push_back({j, k});
                    zc.rows[1][j].push_back({i, k});
                    zc.rows[2][k].push_back({i, j});
                }
    return zc;
}

struct SweepContext {
    const Tensor3& Xm;  // pre-masked data (zeros at masked cells)
    const Mask& mask;
    const ZeroColumns* zc;  // non-null only for explicit masks
    std::mt19937_64& noise_rng;
    std::vector<std::string>* warnings;
};

inline void reset_degenerate_column(Eigen::MatrixXd& T, int f, int mode,
                                    const SweepContext& ctx) {
    for (int r = 0; r < T.rows(); ++r)
        T(r, f) = 1e-3 * (uniform53(ctx.noise_rng) + 1e-6);
    if (ctx.warnings)
        ctx.warnings->push_back("degenerate component " + std::to_string(f) +
                                " reset to noise during mode-" + std::to_string(mode) +
                                " update");
}

// One exact-masked HALS update of the given mode's factor: `sweeps` cyclic
// column sweeps, each entry set to its clipped exact minimizer over the
// row's unmasked columns.
inline void hals_update_mode(FactorModel& m, int mode, const SweepContext& ctx, int sweeps) {
    Eigen::MatrixXd& T = (mode == 1) ? m.A : (mode == 2) ? m.B : m.C;
    const Eigen::MatrixXd& O1 = (mode == 1) ? m.B : m.A;
    const Eigen::MatrixXd& O2 = (mode == 3) ? m.B : m.C;
    const int rows = static_cast<int>(T.rows());
    const int F = m.components();
    const Eigen::VectorXd& lam = m.lambda;

    const Eigen::MatrixXd scale = lam * lam.transpose();
    const Eigen::MatrixXd S1 = O1.transpose() * O1;
    const Eigen::MatrixXd S2 = O2.transpose() * O2;
    const Eigen::MatrixXd Gl = scale.cwiseProduct(S1).cwiseProduct(S2);
    const Eigen::MatrixXd M = mttkrp(ctx.Xm, m, mode) * lam.asDiagonal();

    // Per-row Gram corrections for the masked columns. For the diagonal
    // mask these have closed forms; mode 3 shares one correction across rows.
    const bool diag_off = ctx.mask.kind() == Mask::Kind::DiagonalOff;
    std::vector<Eigen::MatrixXd> corr;
    Eigen::MatrixXd shared_corr;
    bool use_shared = false;
    if (diag_off) {
        if (mode == 3) {
            const int d = std::min(m.origins(), m.destinations());
            const Eigen::MatrixXd AB =
                m.A.topRows(d).cwiseProduct(m.B.topRows(d));  // rows: A(i,:) o B(i,:)
            shared_corr = scale.cwiseProduct(AB.transpose() * AB);
            use_shared = true;
        } else {
            const Eigen::MatrixXd& other = (mode == 1) ? m.B : m.A;
            const Eigen::MatrixXd& Sother = S2;  // C gram in both cases
            corr.resize(rows);
            for (int r = 0; r < rows; ++r) {
                if (r < other.rows()) {
                    const Eigen::VectorXd orow = other.row(r).transpose();
                    corr[r] = scale.cwiseProduct((orow * orow.transpose()).cwiseProduct(Sother));
                } else {
                    corr[r].setZero(F, F);
                }
            }
        }
    } else if (ctx.zc) {
        const auto& lists = ctx.zc->rows[mode - 1];
        corr.resize(rows);
        for (int r = 0; r < rows; ++r) {
            corr[r].setZero(F, F);
            for (const auto& uv : lists[r]) {
                const Eigen::VectorXd w =
                    O1.row(uv[0]).cwiseProduct(O2.row(uv[1])).transpose();
                corr[r] += w * w.transpose();
            }
            corr[r] = scale.cwiseProduct(corr[r]);
        }
    }

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int f = 0; f < F; ++f) {
            if (Gl(f, f) <= kDegenerateGram) {
                if (sweep == 0) reset_degenerate_column(T, f, mode, ctx);
                continue;
            }
            for (int r = 0; r < rows; ++r) {
                const Eigen::MatrixXd* cr =
                    use_shared ? &shared_corr : (corr.empty() ? nullptr : &corr[r]);
                const double d = Gl(f, f) - (cr ? (*cr)(f, f) : 0.0);
                if (d <= kDegenerateGram) continue;  // row fully masked for this component
                double num = M(r, f) + T(r, f) * d - T.row(r).dot(Gl.col(f));
                if (cr) num += T.row(r).dot(cr->col(f));
                T(r, f) = std::max(0.0, num / d);
            }
        }
    }
}

// Overwrite the masked cells of Ximp with the current model's predictions.
inline void impute_masked_cells(Tensor3& Ximp, const FactorModel& m, const SweepContext& ctx) {
    const int F = m.components();
    auto predict = [&](int i, int j, int k) {
        double s = 0.0;
        for (int f = 0; f < F; ++f)
            s += m.lambda(f) * m.A(i, f) * m.B(j, f) * m.C(k, f);
        return s;
    };
    if (ctx.mask.kind() == Mask::Kind::DiagonalOff) {
        const int d = std::min(Ximp.dim0(), Ximp.dim1());
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < Ximp.dim2(); ++k) Ximp(i, i, k) = predict(i, i, k);
        return;
    }
    for (int i = 0; i < Ximp.dim0(); ++i)
        for (const auto& jk : ctx.zc->rows[0][i]) Ximp(i, jk[0], jk[1]) = predict(i, jk[0], jk[1]);
}

// One EM-impute update: refresh imputed cells, then an unmasked HALS sweep.
inline void em_update_mode(FactorModel& m, int mode, Tensor3& Ximp, const SweepContext& ctx,
                           int sweeps) {
    impute_masked_cells(Ximp, m, ctx);
    Eigen::MatrixXd& T = (mode == 1) ? m.A : (mode == 2) ? m.B : m.C;
    const Eigen::MatrixXd& O1 = (mode == 1) ? m.B : m.A;
    const Eigen::MatrixXd& O2 = (mode == 3) ? m.B : m.C;
    const int F = m.components();
    const Eigen::VectorXd& lam = m.lambda;

    const Eigen::MatrixXd Gl = (lam * lam.transpose())
                                   .cwiseProduct(O1.transpose() * O1)
                                   .cwiseProduct(O2.transpose() * O2);
    const Eigen::MatrixXd M = mttkrp(Ximp, m, mode) * lam.asDiagonal();

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int f = 0; f < F; ++f) {
            const double d = Gl(f, f);
            if (d <= kDegenerateGram) {
                if (sweep == 0) reset_degenerate_column(T, f, mode, ctx);
                continue;
            }
            Eigen::VectorXd col =
                T.col(f) + (M.col(f) - T * Gl.col(f)) / d;
            T.col(f) = col.cwiseMax(0.0);
        }
    }
}

struct RestartOutcome {
    FactorModel model;
    std::vector<double> trace;
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

inline RestartOutcome run_single_restart(const Tensor3& Xm, const Mask& mask,
                                         const ZeroColumns* zc, const FitOptions& opts,
                                         std::uint64_t seed) {
    const int I = Xm.dim0(), J = Xm.dim1(), K = Xm.dim2();
    RestartOutcome out;
    out.seed = seed;
    out.model = init_factors(I, J, K, opts.F, seed);
    std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ull);
    SweepContext ctx{Xm, mask, zc, noise_rng, &out.warnings};

    Tensor3 Ximp;  // EM-impute working copy
    if (opts.mask_strategy == MaskStrategy::EmImpute) Ximp = Xm;

    double prev = masked_residual(Xm, out.model, mask);
    out.trace.push_back(prev);
    for (int it = 0; it < opts.max_outer_iters; ++it) {
        for (int mode = 1; mode <= 3; ++mode) {
            if (opts.mask_strategy == MaskStrategy::ExactMasked)
                hals_update_mode(out.model, mode, ctx, opts.inner_iters);
            else
                em_update_mode(out.model, mode, Ximp, ctx, opts.inner_iters);
        }
        const double cur = masked_residual(Xm, out.model, mask);
        out.trace.push_back(cur);
        if (prev - cur <= opts.tol * std::max(prev, 1e-300)) {
            out.converged = true;
            break;
        }
        prev = cur;
    }
    return out;
}

}  // namespace detail

/// One block update of the given mode's factor; does not increase the masked
/// objective. The input model is not modified.
inline Eigen::MatrixXd update_factor(const Tensor3& X, const Mask& mask,
                                     const FactorModel& model, int mode,
                                     MaskStrategy strategy = MaskStrategy::ExactMasked,
                                     std::vector<std::string>* warnings = nullptr) {
    if (mode < 1 || mode > 3)
        throw std::invalid_argument("update_factor: mode must be 1, 2, or 3");
    if (!model.dims_consistent() || !model.matches(X))
        throw std::invalid_argument("update_factor: tensor and model shapes differ");
    if (!mask.matches(X))
        throw std::invalid_argument("update_factor: mask and tensor shapes differ");
    if ((model.A.array() < 0).any() || (model.B.array() < 0).any() ||
        (model.C.array() < 0).any())
        throw std::invalid_argument("update_factor: model factors must be nonnegative");

    FactorModel work = model;
    const Tensor3 Xm = apply_mask(mask, X);
    detail::ZeroColumns zc;
    const detail::ZeroColumns* zcp = nullptr;
    if (mask.kind() == Mask::Kind::Explicit) {
        zc = detail::build_zero_columns(mask);
        zcp = &zc;
    }
    std::mt19937_64 noise_rng(0x6d69677379735f75ull);
    detail::SweepContext ctx{Xm, mask, zcp, noise_rng, warnings};
    if (strategy == MaskStrategy::ExactMasked) {
        detail::hals_update_mode(work, mode, ctx, 1);
    } else {
        Tensor3 Ximp = Xm;
        detail::em_update_mode(work, mode, Ximp, ctx, 1);
    }
    return (mode == 1) ? work.A : (mode == 2) ? work.B : work.C;
}

/// Fit the masked nonnegative CP model: `restarts` independent seeded runs
/// of alternating updates, returning the lowest-loss run (ties to the lowest
/// seed), normalized and lambda-sorted. Deterministic for fixed options,
/// regardless of thread count.
inline FitResult fit(const Tensor3& X, const Mask& mask, const FitOptions& opts) {
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    if (!mask.matches(X))
        throw std::invalid_argument("fit: mask and tensor shapes differ");
    if (opts.F < 1) throw std::invalid_argument("fit: F must be >= 1");
    if (opts.tol <= 0) throw std::invalid_argument("fit: tol must be positive");
    if (opts.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
    if (opts.max_outer_iters < 1)
        throw std::invalid_argument("fit: max_outer_iters must be >= 1");
    if (opts.inner_iters < 1) throw std::invalid_argument("fit: inner_iters must be >= 1");
    for (double v : X.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit: X contains non-finite values");
        if (v < 0.0) throw std::invalid_argument("fit: X contains negative values");
    }
    const long long min_prod = std::min({static_cast<long long>(I) * J,
                                         static_cast<long long>(I) * K,
                                         static_cast<long long>(J) * K});
    if (opts.F >= min_prod)
        throw std::invalid_argument("fit: F is over-parameterized for these dimensions");

    const Tensor3 Xm = apply_mask(mask, X);
    detail::ZeroColumns zc;
    const detail::ZeroColumns* zcp = nullptr;
    if (mask.kind() == Mask::Kind::Explicit) {
        zc = detail::build_zero_columns(mask);
        zcp = &zc;
    }

    std::vector<detail::RestartOutcome> outcomes(opts.restarts);
    const int threads = std::max(1, std::min(opts.threads, opts.restarts));
    if (threads == 1) {
        for (int r = 0; r < opts.restarts; ++r)
            outcomes[r] = detail::run_single_restart(Xm, mask, zcp, opts, opts.seed + r);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (int r = next.fetch_add(1); r < opts.restarts; r = next.fetch_add(1))
                outcomes[r] = detail::run_single_restart(Xm, mask, zcp, opts, opts.seed + r);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int best = 0;
    for (int r = 1; r < opts.restarts; ++r) {
        const double lr = outcomes[r].trace.back();
        const double lb = outcomes[best].trace.back();
        if (lr < lb) best = r;  // ties keep the earlier (lower) seed
    }

    FitResult res;
    res.loss_trace = outcomes[best].trace;
    res.converged = outcomes[best].converged;
    res.iterations_used = static_cast<int>(outcomes[best].trace.size()) - 1;
    res.seed_used = outcomes[best].seed;
    res.warnings = outcomes[best].warnings;
    FactorModel m = normalize(outcomes[best].model, &res.warnings);
    res.model = reorder_components(m, significance_order(m));
    return res;
}

}  // namespace migsys
