// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace migsys {

// ---------------------------------------------------------------------------
// Tensor3: dense third-order array, row-major in (i, j, k).
//
// Axis semantics throughout the library: i = origin, j = destination,
// k = time period. Flat index = (i * J + j) * K + k.
// ---------------------------------------------------------------------------
class Tensor3 {
public:
    Tensor3() = default;

    Tensor3(int I, int J, int K) : I_(I), J_(J), K_(K) {
        if (I <= 0 || J <= 0 || K <= 0)
            throw std::invalid_argument("Tensor3: dimensions must be positive");
        values_.assign(static_cast<std::size_t>(I) * J * K, 0.0);
    }

    Tensor3(int I, int J, int K, std::vector<double> values)
        : I_(I), J_(J), K_(K), values_(std::move(values)) {
        if (I <= 0 || J <= 0 || K <= 0)
            throw std::invalid_argument("Tensor3: dimensions must be positive");
        if (values_.size() != static_cast<std::size_t>(I) * J * K)
            throw std::invalid_argument("Tensor3: value count does not match dimensions");
    }

    int dim0() const { return I_; }  ///< origins
    int dim1() const { return J_; }  ///< destinations
    int dim2() const { return K_; }  ///< periods

    std::size_t size() const { return values_.size(); }

    double operator()(int i, int j, int k) const {
        return values_[flat(i, j, k)];
    }
    double& operator()(int i, int j, int k) {
        return values_[flat(i, j, k)];
    }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

    bool same_shape(const Tensor3& o) const {
        return I_ == o.I_ && J_ == o.J_ && K_ == o.K_;
    }

    /// Frobenius norm over all entries.
    double frobenius_norm() const {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s);
    }

    std::size_t flat(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * J_ + j) * K_ + k;
    }

private:
    int I_ = 0, J_ = 0, K_ = 0;
    std::vector<double> values_;
};

/// True iff every entry is finite and nonnegative (valid flow data).
inline bool is_valid_flow_data(const Tensor3& X) {
    for (double v : X.data())
        if (!std::isfinite(v) || v < 0.0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Mask: binary weight tensor selecting which entries participate in a fit.
//
// Two representations: the compact diagonal-off rule (weight 0 iff i == j,
// the usual case for flow data where same-origin-destination cells carry no
// movement information) and an explicit 0/1 tensor for arbitrary missing
// entries.
// ---------------------------------------------------------------------------
class Mask {
public:
    enum class Kind { DiagonalOff, Explicit };

    /// Diagonal-off mask for an I x J x K tensor.
    static Mask diagonal_off(int I, int J, int K) {
        Mask m;
        m.kind_ = Kind::DiagonalOff;
        m.I_ = I;
        m.J_ = J;
        m.K_ = K;
        if (I <= 0 || J <= 0 || K <= 0)
            throw std::invalid_argument("Mask: dimensions must be positive");
        return m;
    }

    /// Explicit mask; every weight must be 0 or 1.
    static Mask explicit_mask(int I, int J, int K, std::vector<std::uint8_t> weights) {
        Mask m;
        m.kind_ = Kind::Explicit;
        m.I_ = I;
        m.J_ = J;
        m.K_ = K;
        if (I <= 0 || J <= 0 || K <= 0)
            throw std::invalid_argument("Mask: dimensions must be positive");
        if (weights.size() != static_cast<std::size_t>(I) * J * K)
            throw std::invalid_argument("Mask: weight count does not match dimensions");
        for (std::uint8_t w : weights)
            if (w > 1) throw std::invalid_argument("Mask: weights must be 0 or 1");
        m.weights_ = std::move(weights);
        return m;
    }

    Kind kind() const { return kind_; }
    int dim0() const { return I_; }
    int dim1() const { return J_; }
    int dim2() const { return K_; }

    bool matches(const Tensor3& X) const {
        return I_ == X.dim0() && J_ == X.dim1() && K_ == X.dim2();
    }

    /// Weight of entry (i, j, k), either 0 or 1.
    int weight(int i, int j, int k) const {
        if (kind_ == Kind::DiagonalOff) return i == j ? 0 : 1;
        return weights_[(static_cast<std::size_t>(i) * J_ + j) * K_ + k];
    }

    /// Number of zero-weight entries.
    std::size_t masked_count() const {
        if (kind_ == Kind::DiagonalOff)
            return static_cast<std::size_t>(std::min(I_, J_)) * K_;
        std::size_t n = 0;
        for (std::uint8_t w : weights_) n += (w == 0);
        return n;
    }

private:
    Kind kind_ = Kind::DiagonalOff;
    int I_ = 0, J_ = 0, K_ = 0;
    std::vector<std::uint8_t> weights_;  // used only in Explicit mode
};

/// Elementwise product of the mask and a tensor (zeroes masked entries).
inline Tensor3 apply_mask(const Mask& mask, const Tensor3& X) {
    if (!mask.matches(X))
        throw std::invalid_argument("apply_mask: mask and tensor shapes differ");
    Tensor3 out = X;
    const int I = X.dim0(), J = X.dim1(), K = X.dim2();
    if (mask.kind() == Mask::Kind::DiagonalOff) {
        for (int d = 0; d < std::min(I, J); ++d)
            for (int k = 0; k < K; ++k) out(d, d, k) = 0.0;
        return out;
    }
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k)
                if (mask.weight(i, j, k) == 0) out(i, j, k) = 0.0;
    return out;
}

}  // namespace migsys
