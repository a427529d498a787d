// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "migsys/model.hpp"
#include "migsys/tensor.hpp"

namespace migsys {

// ---------------------------------------------------------------------------
// Multilinear kernels. The unfolding column order is part of the contract;
// everything below uses the k-major convention (the later remaining axis
// varies slowest):
//
//   mode 1:  I x (J*K),  column = k*J + j   pairs with khatri_rao(C, B)
//   mode 2:  J x (I*K),  column = k*I + i   pairs with khatri_rao(C, A)
//   mode 3:  K x (I*J),  column = j*I + i   pairs with khatri_rao(B, A)
//
// so unfold(compose(m), n) == factor_n * diag(lambda) * khatri_rao(...)^T.
// ---------------------------------------------------------------------------

/// Mode-n unfolding (n in {1,2,3}) with the column order documented above.
inline Eigen::MatrixXd unfold(const Tensor3& X, int mode) {
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    switch (mode) {
        case 1: {
            Eigen::MatrixXd M(I, static_cast<Eigen::Index>(J) * K);
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        M(i, static_cast<Eigen::Index>(k) * J + j) = X(i, j, k);
            return M;
        }
        case 2: {
            Eigen::MatrixXd M(J, static_cast<Eigen::Index>(I) * K);
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        M(j, static_cast<Eigen::Index>(k) * I + i) = X(i, j, k);
            return M;
        }
        case 3: {
            Eigen::MatrixXd M(K, static_cast<Eigen::Index>(I) * J);
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        M(k, static_cast<Eigen::Index>(j) * I + i) = X(i, j, k);
            return M;
        }
        default:
            throw std::invalid_argument("unfold: mode must be 1, 2, or 3");
    }
}

/// Inverse of `unfold`: rebuilds an I x J x K tensor from a mode-n unfolding.
inline Tensor3 fold(const Eigen::MatrixXd& M, int mode, int I, int J, int K) {
    Tensor3 X(I, J, K);
    switch (mode) {
        case 1:
            if (M.rows() != I || M.cols() != static_cast<Eigen::Index>(J) * K)
                throw std::invalid_argument("fold: matrix shape does not match mode-1 dims");
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        X(i, j, k) = M(i, static_cast<Eigen::Index>(k) * J + j);
            return X;
        case 2:
            if (M.rows() != J || M.cols() != static_cast<Eigen::Index>(I) * K)
                throw std::invalid_argument("fold: matrix shape does not match mode-2 dims");
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        X(i, j, k) = M(j, static_cast<Eigen::Index>(k) * I + i);
            return X;
        case 3:
            if (M.rows() != K || M.cols() != static_cast<Eigen::Index>(I) * J)
                throw std::invalid_argument("fold: matrix shape does not match mode-3 dims");
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < J; ++j)
                    for (int k = 0; k < K; ++k)
                        X(i, j, k) = M(k, static_cast<Eigen::Index>(j) * I + i);
            return X;
        default:
            throw std::invalid_argument("fold: mode must be 1, 2, or 3");
    }
}

/// Columnwise Kronecker product: column f of the result is U(:,f) (x) V(:,f),
/// with row index u * rows(V) + v.
inline Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
    if (U.cols() != V.cols())
        throw std::invalid_argument("khatri_rao: column counts differ");
    const Eigen::Index m = U.rows(), n = V.rows(), F = U.cols();
    Eigen::MatrixXd out(m * n, F);
    for (Eigen::Index f = 0; f < F; ++f)
        for (Eigen::Index u = 0; u < m; ++u)
            out.block(u * n, f, n, 1) = U(u, f) * V.col(f);
    return out;
}

// ---------------------------------------------------------------------------
// mttkrp: matricized-tensor times Khatri-Rao product, the workhorse of the
// alternating updates. Equals unfold(X, mode) * khatri_rao(<other two>) in
// the pairing documented above, computed without materializing either.
// lambda is NOT applied; callers fold it in as needed.
// ---------------------------------------------------------------------------
inline Eigen::MatrixXd mttkrp(const Tensor3& X, const FactorModel& model, int mode) {
    if (!model.dims_consistent())
        throw std::invalid_argument("mttkrp: inconsistent model dimensions");
    if (!model.matches(X))
        throw std::invalid_argument("mttkrp: tensor and model shapes differ");
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    const int F = model.components();
    if (mode < 1 || mode > 3)
        throw std::invalid_argument("mttkrp: mode must be 1, 2, or 3");

    const int rows = (mode == 1) ? I : (mode == 2) ? J : K;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, F);
    const double* p = X.data().data();
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) {
                const double x = *p++;
                if (x == 0.0) continue;
                switch (mode) {
                    case 1:
                        for (int f = 0; f < F; ++f)
                            M(i, f) += x * model.B(j, f) * model.C(k, f);
                        break;
                    case 2:
                        for (int f = 0; f < F; ++f)
                            M(j, f) += x * model.A(i, f) * model.C(k, f);
                        break;
                    default:
                        for (int f = 0; f < F; ++f)
                            M(k, f) += x * model.A(i, f) * model.B(j, f);
                        break;
                }
            }
    return M;
}

/// Masked residual || W o (X - compose(model)) ||_F; masked entries
/// contribute exactly zero.
inline double masked_residual(const Tensor3& X, const FactorModel& model, const Mask& mask) {
    if (!model.dims_consistent())
        throw std::invalid_argument("masked_residual: inconsistent model dimensions");
    if (!model.matches(X))
        throw std::invalid_argument("masked_residual: tensor and model shapes differ");
    if (!mask.matches(X))
        throw std::invalid_argument("masked_residual: mask and tensor shapes differ");
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    const int F = model.components();
    double s = 0.0;
    const double* p = X.data().data();
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) {
                const double x = *p++;
                if (mask.weight(i, j, k) == 0) continue;
                double xhat = 0.0;
                for (int f = 0; f < F; ++f)
                    xhat += model.lambda(f) * model.A(i, f) * model.B(j, f) * model.C(k, f);
                const double r = x - xhat;
                s += r * r;
            }
    return std::sqrt(s);
}

}  // namespace migsys
