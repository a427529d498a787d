// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsys/tensor.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// FactorModel: nonnegative factor matrices A (origins x F), B (destinations
// x F), C (periods x F) plus per-component weights lambda. One column triple
// (a_f, b_f, c_f) is one migration system; lambda_f carries the scale that
// column normalization removes and orders systems by significance.
// ---------------------------------------------------------------------------
struct FactorModel {
    Eigen::MatrixXd A;       // I x F, origin memberships
    Eigen::MatrixXd B;       // J x F, destination memberships
    Eigen::MatrixXd C;       // K x F, temporal profiles
    Eigen::VectorXd lambda;  // length F, component scales

    FactorModel() = default;

    FactorModel(int I, int J, int K, int F)
        : A(Eigen::MatrixXd::Zero(I, F)),
          B(Eigen::MatrixXd::Zero(J, F)),
          C(Eigen::MatrixXd::Zero(K, F)),
          lambda(Eigen::VectorXd::Ones(F)) {
        if (I <= 0 || J <= 0 || K <= 0 || F <= 0)
            throw std::invalid_argument("FactorModel: dimensions must be positive");
    }

    int origins() const { return static_cast<int>(A.rows()); }
    int destinations() const { return static_cast<int>(B.rows()); }
    int periods() const { return static_cast<int>(C.rows()); }
    int components() const { return static_cast<int>(A.cols()); }

    bool dims_consistent() const {
        return A.cols() == B.cols() && B.cols() == C.cols() &&
               lambda.size() == A.cols() && A.cols() >= 1;
    }

    bool same_space(const FactorModel& o) const {
        return A.rows() == o.A.rows() && B.rows() == o.B.rows() && C.rows() == o.C.rows();
    }

    bool matches(const Tensor3& X) const {
        return A.rows() == X.dim0() && B.rows() == X.dim1() && C.rows() == X.dim2();
    }
};

/// Outer product a o b o c: out(i,j,k) = a(i) * b(j) * c(k).
inline Tensor3 rank_one(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& c) {
    const int I = static_cast<int>(a.size());
    const int J = static_cast<int>(b.size());
    const int K = static_cast<int>(c.size());
    if (I == 0 || J == 0 || K == 0)
        throw std::invalid_argument("rank_one: vectors must be non-empty");
    for (const auto* v : {&a, &b, &c})
        if (!v->allFinite()) throw std::invalid_argument("rank_one: inputs must be finite");
    Tensor3 out(I, J, K);
    double* p = out.data().data();
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j) {
            const double ab = a(i) * b(j);
            for (int k = 0; k < K; ++k) *p++ = ab * c(k);
        }
    return out;
}

/// Sum of lambda-weighted rank-one terms: sum_f lambda_f * a_f o b_f o c_f.
inline Tensor3 compose(const FactorModel& model) {
    if (!model.dims_consistent())
        throw std::invalid_argument("compose: inconsistent model dimensions");
    const int I = model.origins(), J = model.destinations(), K = model.periods();
    const int F = model.components();
    Tensor3 out(I, J, K);
    double* p = out.data().data();
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) {
                double s = 0.0;
                for (int f = 0; f < F; ++f)
                    s += model.lambda(f) * model.A(i, f) * model.B(j, f) * model.C(k, f);
                *p++ = s;
            }
    return out;
}

// ---------------------------------------------------------------------------
// normalize: scale every factor column to unit Euclidean norm and fold the
// removed norms into lambda, leaving compose(model) unchanged. A zero column
// zeroes the component's lambda instead (recorded in `warnings` if given).
// ---------------------------------------------------------------------------
inline FactorModel normalize(const FactorModel& model,
                             std::vector<std::string>* warnings = nullptr) {
    if (!model.dims_consistent())
        throw std::invalid_argument("normalize: inconsistent model dimensions");
    if (!model.A.allFinite() || !model.B.allFinite() || !model.C.allFinite() ||
        !model.lambda.allFinite())
        throw std::invalid_argument("normalize: model must be finite");
    FactorModel out = model;
    for (int f = 0; f < out.components(); ++f) {
        const double na = out.A.col(f).norm();
        const double nb = out.B.col(f).norm();
        const double nc = out.C.col(f).norm();
        if (na == 0.0 || nb == 0.0 || nc == 0.0) {
            out.lambda(f) = 0.0;
            if (warnings)
                warnings->push_back("component " + std::to_string(f) +
                                    " has a zero factor column; lambda set to 0");
            if (na > 0.0) out.A.col(f) /= na;
            if (nb > 0.0) out.B.col(f) /= nb;
            if (nc > 0.0) out.C.col(f) /= nc;
            continue;
        }
        out.A.col(f) /= na;
        out.B.col(f) /= nb;
        out.C.col(f) /= nc;
        out.lambda(f) *= na * nb * nc;
    }
    return out;
}

/// Reorder components by the given permutation: column r of the result is
/// column perm[r] of the input.
inline FactorModel reorder_components(const FactorModel& model, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != model.components())
        throw std::invalid_argument("reorder_components: permutation size mismatch");
    FactorModel out = model;
    for (int r = 0; r < model.components(); ++r) {
        const int f = perm[r];
        if (f < 0 || f >= model.components())
            throw std::invalid_argument("reorder_components: index out of range");
        out.A.col(r) = model.A.col(f);
        out.B.col(r) = model.B.col(f);
        out.C.col(r) = model.C.col(f);
        out.lambda(r) = model.lambda(f);
    }
    return out;
}

}  // namespace migsys
