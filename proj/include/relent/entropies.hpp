#pragma once

// Entropy and thermodynamic functionals, all in nats.

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "relent/errors.hpp"
#include "relent/linalg.hpp"
#include "relent/states.hpp"

namespace relent {

namespace tol {
inline constexpr double support_weight = 1e-10;  // sigma weight on ker(rho) above this is INFINITE
}

/// t ln t with 0 ln 0 = 0.
inline double xlogx(double t) { return t == 0.0 ? 0.0 : t * std::log(t); }

/// -t ln t with 0 ln 0 = 0.
inline double eta(double t) { return -xlogx(t); }

/// A real value in nats, or the distinguished value INFINITE.
class EntropyValue {
public:
    constexpr EntropyValue() = default;
    constexpr explicit EntropyValue(double v) : value_(v) {}

    static constexpr EntropyValue infinite() {
        EntropyValue e;
        e.infinite_ = true;
        e.value_ = std::numeric_limits<double>::infinity();
        return e;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }
    /// +inf for INFINITE.
    constexpr double value() const { return value_; }

    /// Scales a finite value; INFINITE stays INFINITE.
    EntropyValue scaled(double factor) const {
        return infinite_ ? infinite() : EntropyValue(value_ * factor);
    }

    friend bool operator==(const EntropyValue&, const EntropyValue&) = default;

    friend std::ostream& operator<<(std::ostream& os, const EntropyValue& e) {
        if (e.infinite_) return os << "inf";
        return os << e.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

/// S(rho) = -Tr rho ln rho.
inline EntropyValue von_neumann(const DensityMatrix& rho) {
    double s = 0.0;
    for (double v : rho.spectrum().eigenvalues) s += eta(v);
    return EntropyValue(s);
}

/// Umegaki S(sigma||rho) = Tr sigma (ln sigma - ln rho). INFINITE when sigma
/// puts weight above tol::support_weight on the numerical kernel of rho.
inline EntropyValue relative_entropy(const DensityMatrix& sigma, const DensityMatrix& rho) {
    if (sigma.dim() != rho.dim()) {
        throw ArgumentError("relative_entropy: dimension mismatch " +
                            std::to_string(sigma.dim()) + " vs " + std::to_string(rho.dim()));
    }
    const SpectralDecomposition& r = rho.spectrum();
    const Matrix in_rho_basis = r.eigenvectors.adjoint() * sigma.matrix() * r.eigenvectors;

    double kernel_weight = 0.0;
    double cross = 0.0;
    for (Eigen::Index k = 0; k < r.dim(); ++k) {
        const double w = in_rho_basis(k, k).real();
        if (r.eigenvalues[k] <= tol::full_rank) {
            kernel_weight += w;
        } else {
            cross += w * std::log(r.eigenvalues[k]);
        }
    }
    if (kernel_weight > tol::support_weight) return EntropyValue::infinite();

    double self = 0.0;
    for (double v : sigma.spectrum().eigenvalues) self += xlogx(v);
    return EntropyValue(self - cross);
}

/// S(state || rho^{(x)n}) without diagonalizing rho^{(x)n}: the product basis of
/// rho's eigenvectors diagonalizes it, with ln eigenvalues summed per site.
inline EntropyValue relative_entropy_to_product(const DensityMatrix& state,
                                                const DensityMatrix& rho, std::size_t n,
                                                std::size_t cap = kDefaultDenseCap) {
    const auto d = static_cast<std::size_t>(rho.dim());
    const std::size_t total = checked_power(d, n, cap);
    if (static_cast<std::size_t>(state.dim()) != total) {
        throw ArgumentError("state has dim " + std::to_string(state.dim()) + ", expected " +
                            std::to_string(d) + "^" + std::to_string(n));
    }
    const SpectralDecomposition& r = rho.spectrum();
    const Matrix basis = kron_power(r.eigenvectors, n, cap);
    const Matrix rotated = basis.adjoint() * state.matrix() * basis;

    std::vector<double> log_r(d);
    std::vector<bool> kernel(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double v = r.eigenvalues[static_cast<Eigen::Index>(k)];
        kernel[k] = v <= tol::full_rank;
        log_r[k] = kernel[k] ? 0.0 : std::log(v);
    }

    double kernel_weight = 0.0;
    double cross = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
        const double w = rotated(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
        double log_eig = 0.0;
        bool in_kernel = false;
        // Digits of j in base d, most significant first, are the per-site indices.
        for (std::size_t rest = j, i = 0; i < n; ++i, rest /= d) {
            const std::size_t k = rest % d;
            in_kernel = in_kernel || kernel[k];
            log_eig += log_r[k];
        }
        if (in_kernel) {
            kernel_weight += w;
        } else {
            cross += w * log_eig;
        }
    }
    if (kernel_weight > tol::support_weight) return EntropyValue::infinite();

    double self = 0.0;
    for (double v : state.spectrum().eigenvalues) self += xlogx(v);
    return EntropyValue(self - cross);
}

/// Belavkin-Staszewski entropy Tr(rho phi(X)) with phi(t) = t ln t and
/// X = rho^{-1/2} sigma rho^{-1/2}. Requires full-rank rho.
inline EntropyValue bs_entropy(const DensityMatrix& sigma, const DensityMatrix& rho) {
    const HermitianOperator x = x_operator(rho, sigma);
    const SpectralDecomposition xs = clip_psd(spectral_decompose(x));
    double s = 0.0;
    for (Eigen::Index k = 0; k < xs.dim(); ++k) {
        const auto u = xs.eigenvectors.col(k);
        const double q = u.dot(rho.matrix() * u).real();  // dot conjugates the left operand
        s += q * xlogx(xs.eigenvalues[k]);
    }
    return EntropyValue(s);
}

/// Tr(H sigma) - Tr(H rho): the reservoir's mean-energy change when one
/// non-interacting particle moves from rho to sigma.
inline double energy_change(const HermitianOperator& h, const DensityMatrix& rho,
                            const DensityMatrix& sigma) {
    if (h.dim() != rho.dim() || h.dim() != sigma.dim()) {
        throw ArgumentError("energy_change: dimension mismatch");
    }
    return trace_product(h.matrix(), sigma.matrix()) - trace_product(h.matrix(), rho.matrix());
}

/// F(rho_n) - F(rho^{(x)n}) = beta^{-1} S(rho_n || rho^{(x)n}), in energy units.
inline EntropyValue free_energy_gap(const DensityMatrix& rho_n, const DensityMatrix& rho,
                                    std::size_t n, double beta,
                                    std::size_t cap = kDefaultDenseCap) {
    if (!(beta > 0.0)) {
        throw ArgumentError("free_energy_gap requires beta > 0, got " + std::to_string(beta));
    }
    return relative_entropy_to_product(rho_n, rho, n, cap).scaled(1.0 / beta);
}

}  // namespace relent
