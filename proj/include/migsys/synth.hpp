// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsys/model.hpp"
#include "migsys/rng.hpp"
#include "migsys/selection.hpp"
#include "migsys/tensor.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Planted-system generator: sparse nonnegative origin/destination factors
// with known supports, smooth positive temporal profiles, and log-uniform
// component weights. Ground truth for recovery experiments.
// ---------------------------------------------------------------------------

struct PlantSpec {
    int I = 12, J = 12, K = 8;
    int F = 3;
    int origin_support = 3;       ///< active origins per component
    int dest_support = 3;         ///< active destinations per component
    bool overlap_allowed = true;  ///< false: supports pairwise disjoint
    double noise_sigma = 0.0;     ///< relative noise level for synth_tensor
    std::uint64_t seed = 0;
};

namespace detail {

/// `count` distinct indices from [0, n), drawn without replacement.
inline std::vector<int> sample_without_replacement(int n, int count, std::mt19937_64& gen,
                                                   std::vector<int>* pool = nullptr) {
    std::vector<int> local;
    std::vector<int>& p = pool ? *pool : local;
    if (!pool) {
        p.resize(n);
        std::iota(p.begin(), p.end(), 0);
    }
    std::vector<int> out;
    out.reserve(count);
    for (int c = 0; c < count; ++c) {
        const std::size_t pick = gen() % p.size();
        out.push_back(p[pick]);
        p[pick] = p.back();
        p.pop_back();
    }
    return out;
}

}  // namespace detail

/// Deterministic planted model: per component, `origin_support` origins and
/// `dest_support` destinations with uniform(0.5, 1.5) weights; c_f a
/// clipped random walk plus a 0.5 baseline; columns unit-normalized; lambda
/// log-uniform in [1, 10].
inline FactorModel plant_model(const PlantSpec& spec) {
    if (spec.I < 1 || spec.J < 1 || spec.K < 1 || spec.F < 1)
        throw std::invalid_argument("plant_model: dimensions must be positive");
    if (spec.origin_support < 1 || spec.origin_support > spec.I ||
        spec.dest_support < 1 || spec.dest_support > spec.J)
        throw std::invalid_argument("plant_model: support exceeds dimension");
    if (!spec.overlap_allowed && (spec.F * spec.origin_support > spec.I ||
                                  spec.F * spec.dest_support > spec.J))
        throw std::invalid_argument(
            "plant_model: disjoint supports do not fit (F * support > dimension)");

    std::mt19937_64 gen(spec.seed);
    FactorModel m(spec.I, spec.J, spec.K, spec.F);

    std::vector<int> origin_pool(spec.I), dest_pool(spec.J);
    std::iota(origin_pool.begin(), origin_pool.end(), 0);
    std::iota(dest_pool.begin(), dest_pool.end(), 0);

    for (int f = 0; f < spec.F; ++f) {
        const auto orig = spec.overlap_allowed
                              ? detail::sample_without_replacement(spec.I, spec.origin_support, gen)
                              : detail::sample_without_replacement(spec.I, spec.origin_support, gen,
                                                                   &origin_pool);
        for (int i : orig) m.A(i, f) = uniform_in(gen, 0.5, 1.5);
        const auto dest = spec.overlap_allowed
                              ? detail::sample_without_replacement(spec.J, spec.dest_support, gen)
                              : detail::sample_without_replacement(spec.J, spec.dest_support, gen,
                                                                   &dest_pool);
        for (int j : dest) m.B(j, f) = uniform_in(gen, 0.5, 1.5);

        double level = 1.0;
        for (int k = 0; k < spec.K; ++k) {
            m.C(k, f) = std::max(0.0, level) + 0.5;
            level += 0.3 * standard_normal(gen);
        }

        m.A.col(f).normalize();
        m.B.col(f).normalize();
        m.C.col(f).normalize();
        m.lambda(f) = std::pow(10.0, uniform53(gen));  // log-uniform in [1, 10)
    }
    return m;
}

/// Noisy tensor from a planted model: off-diagonal entries are
/// compose(model) * (1 + Normal(0, sigma)) clipped at zero; diagonal cells
/// are overwritten with 1e6 so that mask correctness is exercised, never
/// assumed. Returns the tensor and its diagonal-off mask.
inline std::pair<Tensor3, Mask> synth_tensor(const FactorModel& model, double noise_sigma,
                                             std::uint64_t seed) {
    if (noise_sigma < 0) throw std::invalid_argument("synth_tensor: sigma must be >= 0");
    if ((model.A.array() < 0).any() || (model.B.array() < 0).any() ||
        (model.C.array() < 0).any())
        throw std::invalid_argument("synth_tensor: model must be nonnegative");
    Tensor3 X = compose(model);
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    std::mt19937_64 gen(seed);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) {
                if (i == j) {
                    X(i, j, k) = 1e6;  // poisoned: a correct fit must never read these
                    continue;
                }
                if (noise_sigma > 0.0)
                    X(i, j, k) = std::max(0.0, X(i, j, k) * (1.0 + noise_sigma * standard_normal(gen)));
            }
    return {std::move(X), Mask::diagonal_off(I, J, K)};
}

/// Multiply c_f(period) by `amplitude` and renormalize, scaling lambda_f so
/// the composed mass at all other periods is preserved exactly.
inline FactorModel inject_spike(const FactorModel& model, int f, int period, double amplitude) {
    if (f < 0 || f >= model.components())
        throw std::invalid_argument("inject_spike: component index out of range");
    if (period < 0 || period >= model.periods())
        throw std::invalid_argument("inject_spike: period index out of range");
    if (amplitude <= 0) throw std::invalid_argument("inject_spike: amplitude must be positive");
    FactorModel out = model;
    Eigen::VectorXd c = out.C.col(f);
    c(period) *= amplitude;
    const double n = c.norm();
    if (n == 0.0) return out;  // zero profile: nothing to spike
    out.C.col(f) = c / n;
    out.lambda(f) *= n;
    return out;
}

/// Mean per-component congruence between truth and estimate under the
/// optimal matching. With differing F, the best min(F) pairs are scored and
/// a warning is recorded.
inline double congruence_score(const FactorModel& truth, const FactorModel& estimate,
                               std::vector<std::string>* warnings = nullptr) {
    if (!truth.same_space(estimate))
        throw std::invalid_argument("congruence_score: models live in different spaces");
    if (truth.components() != estimate.components() && warnings)
        warnings->push_back("congruence_score: component counts differ (" +
                            std::to_string(truth.components()) + " vs " +
                            std::to_string(estimate.components()) +
                            "); scoring best min(F) pairs");
    const ComponentMatching match = match_components(truth, estimate);
    if (match.pairs.empty()) return 0.0;
    return match.total_congruence / static_cast<double>(match.pairs.size());
}

}  // namespace migsys
