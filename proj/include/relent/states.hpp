#pragma once

// Gibbs states, unitarily perturbed states, and the sandwiched operator
// X = rho^{-1/2} sigma rho^{-1/2}.

#include <cmath>
#include <string>
#include <utility>

#include "relent/errors.hpp"
#include "relent/linalg.hpp"

namespace relent {

namespace tol {
inline constexpr double trace_one = 1e-10;
inline constexpr double unitarity = 1e-10;
}  // namespace tol

/// Positive semidefinite, unit-trace Hermitian operator. The clipped spectral
/// decomposition is computed once at construction and kept alongside.
class DensityMatrix {
public:
    explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
        const double tr = op_.trace();
        if (std::abs(tr - 1.0) > tol::trace_one) {
            throw ValidationError("trace invariant violated: trace = " + std::to_string(tr) +
                                  " (must equal 1 within 1e-10)");
        }
        spectrum_ = clip_psd(spectral_decompose(op_));
    }

    explicit DensityMatrix(Matrix m) : DensityMatrix(HermitianOperator(std::move(m))) {}

    Eigen::Index dim() const { return op_.dim(); }
    const HermitianOperator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }
    /// Eigenvalues are clipped to be nonnegative.
    const SpectralDecomposition& spectrum() const { return spectrum_; }

    bool full_rank(double threshold = tol::full_rank) const {
        return spectrum_.eigenvalues.minCoeff() > threshold;
    }

private:
    HermitianOperator op_;
    SpectralDecomposition spectrum_;
};

struct GibbsSpec {
    HermitianOperator hamiltonian;
    double beta = 1.0;  // inverse temperature; 0 gives the maximally mixed state
};

/// e^{-beta H} / Tr e^{-beta H}, evaluated with the exponent shifted by the
/// smallest eigenvalue of H so that the largest Boltzmann factor is exactly 1.
inline DensityMatrix gibbs(const GibbsSpec& spec) {
    if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta)) {
        throw ValidationError("beta must be finite and nonnegative, got " +
                              std::to_string(spec.beta));
    }
    const SpectralDecomposition h = spectral_decompose(spec.hamiltonian);
    const double e0 = h.eigenvalues.minCoeff();
    RealVector weights(h.dim());
    for (Eigen::Index i = 0; i < h.dim(); ++i) {
        weights[i] = std::exp(-spec.beta * (h.eigenvalues[i] - e0));
    }
    weights /= weights.sum();
    SpectralDecomposition boltzmann{weights, h.eigenvectors};
    return DensityMatrix(HermitianOperator::hermitized(boltzmann.reconstruct()));
}

inline double unitarity_defect(const Matrix& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    return max_norm(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols()));
}

/// sigma = U rho U*.
inline DensityMatrix perturb_unitary(const DensityMatrix& rho, const Matrix& u) {
    if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
        throw ArgumentError("perturbation has shape " + std::to_string(u.rows()) + "x" +
                            std::to_string(u.cols()) + ", state has dim " +
                            std::to_string(rho.dim()));
    }
    const double defect = unitarity_defect(u);
    if (!(defect <= tol::unitarity)) {
        throw ValidationError("unitarity check failed: max|U U* - I| = " +
                              std::to_string(defect) + " exceeds 1e-10");
    }
    return DensityMatrix(HermitianOperator::hermitized(u * rho.matrix() * u.adjoint()));
}

/// rho^{-1/2} for a full-rank state; RankError otherwise.
inline HermitianOperator inverse_sqrt(const DensityMatrix& rho) {
    const double lo = rho.spectrum().eigenvalues.minCoeff();
    if (!(lo > tol::full_rank)) {
        throw RankError("state is not full rank: smallest eigenvalue " + std::to_string(lo) +
                        " <= 1e-12");
    }
    return matrix_function(rho.spectrum(), [](double t) { return 1.0 / std::sqrt(t); });
}

inline HermitianOperator sqrt_psd(const DensityMatrix& rho) {
    return matrix_function(rho.spectrum(), [](double t) { return std::sqrt(t); });
}

/// X = rho^{-1/2} sigma rho^{-1/2}; satisfies Tr(rho X) = 1.
inline HermitianOperator x_operator(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw ArgumentError("x_operator: dimension mismatch " + std::to_string(rho.dim()) +
                            " vs " + std::to_string(sigma.dim()));
    }
    const Matrix r = inverse_sqrt(rho).matrix();
    return HermitianOperator::hermitized(r * sigma.matrix() * r);
}

}  // namespace relent
