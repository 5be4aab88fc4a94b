#pragma once

// Dense construction of the weighted reservoir mixture
//   rho_{n,k} = sum_i a_i rho^{(x)i} (x) sigma^{(x)k} (x) rho^{(x)(n-k-i)}
// and exact small-n evaluation of S(rho_{n,k} || rho^{(x)n}) and its
// Belavkin-Staszewski upper bound.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "relent/entropies.hpp"
#include "relent/errors.hpp"
#include "relent/linalg.hpp"
#include "relent/states.hpp"
#include "relent/weights.hpp"

namespace relent {

struct MixtureSpec {
    DensityMatrix rho;    // single-site reference state, dim d
    DensityMatrix sigma;  // dim d (replicated k times) or a dim d^k block state
    WeightScheme scheme = WeightScheme::uniform();
    std::size_t n = 1;
    std::size_t k = 1;
    std::size_t dense_cap = kDefaultDenseCap;

    std::size_t local_dim() const { return static_cast<std::size_t>(rho.dim()); }
    std::size_t row_length() const { return n - k + 1; }

    void validate() const {
        if (k < 1 || n < k) {
            throw ArgumentError("mixture requires n >= k >= 1, got n = " + std::to_string(n) +
                                ", k = " + std::to_string(k));
        }
        const std::size_t d = local_dim();
        const auto sd = static_cast<std::size_t>(sigma.dim());
        if (sd != d && sd != checked_power(d, k, dense_cap)) {
            throw ArgumentError("sigma has dim " + std::to_string(sd) + ", expected " +
                                std::to_string(d) + " or " + std::to_string(d) + "^" +
                                std::to_string(k));
        }
        checked_power(d, n, dense_cap);
    }
};

/// The k-site perturbed block: sigma^{(x)k}, or sigma itself if it already spans k sites.
inline Matrix block_state(const MixtureSpec& spec) {
    if (spec.k > 1 && static_cast<std::size_t>(spec.sigma.dim()) == spec.local_dim()) {
        return kron_power(spec.sigma.matrix(), spec.k, spec.dense_cap);
    }
    return spec.sigma.matrix();
}

inline DensityMatrix build_mixture(const MixtureSpec& spec) {
    spec.validate();
    const std::size_t free_sites = spec.n - spec.k;
    const auto weights = spec.scheme.row(spec.row_length());
    const Matrix block = block_state(spec);

    std::vector<Matrix> powers{Matrix::Identity(1, 1)};
    for (std::size_t m = 1; m <= free_sites; ++m) {
        powers.push_back(kron(powers.back(), spec.rho.matrix(), spec.dense_cap));
    }

    const auto total = static_cast<Eigen::Index>(
        checked_power(spec.local_dim(), spec.n, spec.dense_cap));
    Matrix out = Matrix::Zero(total, total);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        out += weights[i] * kron(kron(powers[i], block, spec.dense_cap),
                                 powers[free_sites - i], spec.dense_cap);
    }
    return DensityMatrix(HermitianOperator::hermitized(out));
}

/// X for the block: (rho^{-1/2})^{(x)k} sigma_block (rho^{-1/2})^{(x)k}.
inline HermitianOperator block_x_operator(const MixtureSpec& spec) {
    spec.validate();
    const Matrix r = kron_power(inverse_sqrt(spec.rho).matrix(), spec.k, spec.dense_cap);
    return HermitianOperator::hermitized(r * block_state(spec) * r);
}

/// Y_n = sum_i a_i (I^{(x)i} (x) X (x) I^{(x)(n-k-i)}), where X spans k = log_d(dim X) sites.
inline HermitianOperator build_weighted_sum(const HermitianOperator& x, const WeightScheme& scheme,
                                            std::size_t n, std::size_t d,
                                            std::size_t cap = kDefaultDenseCap) {
    std::size_t k = 1;
    for (std::size_t b = d; d > 1 && b < static_cast<std::size_t>(x.dim()); b *= d) ++k;
    if (k > n) throw ArgumentError("block spans more sites than n");
    const auto weights = scheme.row(n - k + 1);
    const auto total = static_cast<Eigen::Index>(checked_power(d, n, cap));
    Matrix out = Matrix::Zero(total, total);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        out += weights[i] * embed_block(x.matrix(), i, n, d, cap);
    }
    return HermitianOperator::hermitized(out);
}

inline EntropyValue dense_relative_entropy(const MixtureSpec& spec) {
    return relative_entropy_to_product(build_mixture(spec), spec.rho, spec.n, spec.dense_cap);
}

/// Tr(rho^{(x)n} phi(Y_n)), phi(t) = t ln t.
inline EntropyValue dense_bs_bound(const MixtureSpec& spec) {
    const HermitianOperator y = build_weighted_sum(block_x_operator(spec), spec.scheme, spec.n,
                                                   spec.local_dim(), spec.dense_cap);
    const SpectralDecomposition ys = clip_psd(spectral_decompose(y));
    const Matrix reference = kron_power(spec.rho.matrix(), spec.n, spec.dense_cap);
    const Eigen::RowVectorXd weights =
        ys.eigenvectors.conjugate().cwiseProduct(reference * ys.eigenvectors).colwise().sum().real();
    double s = 0.0;
    for (Eigen::Index j = 0; j < ys.dim(); ++j) s += weights[j] * xlogx(ys.eigenvalues[j]);
    return EntropyValue(s);
}

}  // namespace relent
