#pragma once

// Dense Hermitian spectral calculus and tensor-product embeddings.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "relent/errors.hpp"

namespace relent {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Largest operator dimension the dense evaluators will build unless overridden.
inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 14;

namespace tol {
inline constexpr double hermiticity = 1e-10;  // relative, max-norm
inline constexpr double psd_clip = 1e-10;     // eigenvalues in [-psd_clip, 0) snap to 0
inline constexpr double full_rank = 1e-12;    // eigenvalues at or below are kernel
}  // namespace tol

inline double max_norm(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double rel_tol = tol::hermiticity) {
    if (m.rows() != m.cols()) return false;
    const double scale = max_norm(m);
    const double defect = max_norm(m - m.adjoint());
    return defect <= rel_tol * (scale > 0.0 ? scale : 1.0);
}

/// Re Tr(A B) without forming the product.
inline double trace_product(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b.transpose()).sum().real();
}

/// d^n with overflow and cap checks.
inline std::size_t checked_power(std::size_t d, std::size_t n, std::size_t cap) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (d != 0 && out > cap / d) {
            throw CapacityError("dimension " + std::to_string(d) + "^" + std::to_string(n) +
                                " exceeds dense cap " + std::to_string(cap));
        }
        out *= d;
    }
    return out;
}

inline void check_capacity(std::size_t dim, std::size_t cap) {
    if (dim > cap) {
        throw CapacityError("dimension " + std::to_string(dim) + " exceeds dense cap " +
                            std::to_string(cap));
    }
}

/// A d x d complex self-adjoint matrix.
class HermitianOperator {
public:
    HermitianOperator() = default;

    /// Validates Hermiticity against tol::hermiticity; throws ValidationError.
    explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols()) {
            throw ValidationError("Hermitian operator must be square with dim >= 1, got " +
                                  std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
        }
        if (!m_.allFinite()) throw ValidationError("Hermitian operator has non-finite entries");
        if (!is_hermitian(m_)) {
            throw ValidationError("matrix is not Hermitian within relative tolerance 1e-10");
        }
    }

    /// Projects onto the Hermitian part without validation. For results of
    /// computations that are Hermitian up to round-off.
    static HermitianOperator hermitized(const Matrix& m) {
        HermitianOperator out;
        out.m_ = (m + m.adjoint()) * 0.5;
        return out;
    }

    static HermitianOperator identity(Eigen::Index d) {
        return hermitized(Matrix::Identity(d, d));
    }

    static HermitianOperator diagonal(std::span<const double> values) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                                static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
        }
        return HermitianOperator(std::move(m));
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }

private:
    Matrix m_;
};

struct SpectralDecomposition {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // orthonormal columns

    Eigen::Index dim() const { return eigenvalues.size(); }

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }
};

/// Eigendecomposition with ascending eigenvalues. Purely real input takes the
/// real symmetric solver.
inline SpectralDecomposition spectral_decompose(const HermitianOperator& a) {
    const Matrix& m = a.matrix();
    SpectralDecomposition out;
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
        if (es.info() != Eigen::Success) throw DomainError("eigensolver did not converge");
        out.eigenvalues = es.eigenvalues();
        out.eigenvectors = es.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        if (es.info() != Eigen::Success) throw DomainError("eigensolver did not converge");
        out.eigenvalues = es.eigenvalues();
        out.eigenvectors = es.eigenvectors();
    }
    return out;
}

/// Applies the PSD clipping policy: eigenvalues in [-psd_clip, 0) become 0,
/// anything lower is a ValidationError.
inline SpectralDecomposition clip_psd(SpectralDecomposition d, double clip = tol::psd_clip) {
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
        double& v = d.eigenvalues[i];
        if (v < -clip) {
            throw ValidationError("operator is not positive semidefinite: eigenvalue " +
                                  std::to_string(v));
        }
        if (v < 0.0) v = 0.0;
    }
    return d;
}

/// U diag(f(lambda)) U*. A non-finite f value raises DomainError.
template <class F>
HermitianOperator matrix_function(const SpectralDecomposition& d, F&& f) {
    RealVector fv(d.dim());
    for (Eigen::Index i = 0; i < d.dim(); ++i) {
        fv[i] = f(d.eigenvalues[i]);
        if (!std::isfinite(fv[i])) {
            throw DomainError("matrix function undefined at eigenvalue " +
                              std::to_string(d.eigenvalues[i]));
        }
    }
    return HermitianOperator::hermitized(d.eigenvectors * fv.cast<Complex>().asDiagonal() *
                                         d.eigenvectors.adjoint());
}

inline Matrix kron(const Matrix& a, const Matrix& b, std::size_t cap = kDefaultDenseCap) {
    check_capacity(static_cast<std::size_t>(a.rows() * b.rows()), cap);
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    Matrix out(a.rows() * br, a.cols() * bc);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

inline HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b,
                              std::size_t cap = kDefaultDenseCap) {
    return HermitianOperator::hermitized(kron(a.matrix(), b.matrix(), cap));
}

/// A^{(x)n}; the 1x1 identity for n = 0.
inline Matrix kron_power(const Matrix& a, std::size_t n, std::size_t cap = kDefaultDenseCap) {
    checked_power(static_cast<std::size_t>(a.rows()), n, cap);
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < n; ++i) out = kron(out, a, cap);
    return out;
}

/// I^{(x)site} (x) block (x) I^{(x)(n-k-site)}, where block acts on k = log_d(dim block)
/// consecutive sites.
inline Matrix embed_block(const Matrix& block, std::size_t site, std::size_t n, std::size_t d,
                          std::size_t cap = kDefaultDenseCap) {
    if (d < 1) throw ArgumentError("local dimension must be >= 1");
    std::size_t k = 1;
    std::size_t block_dim = d;
    while (d > 1 && block_dim < static_cast<std::size_t>(block.rows())) {
        block_dim *= d;
        ++k;
    }
    if (block.rows() != block.cols() || block_dim != static_cast<std::size_t>(block.rows())) {
        throw ArgumentError("block dimension " + std::to_string(block.rows()) +
                            " is not a power of " + std::to_string(d));
    }
    if (k > n || site > n - k) {
        throw ArgumentError("site " + std::to_string(site) + " out of range for " +
                            std::to_string(k) + "-site block on " + std::to_string(n) + " sites");
    }
    const std::size_t total = checked_power(d, n, cap);
    const auto left = static_cast<Eigen::Index>(checked_power(d, site, cap));
    const auto right = static_cast<Eigen::Index>(checked_power(d, n - k - site, cap));
    const auto bd = static_cast<Eigen::Index>(block_dim);

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    for (Eigen::Index a = 0; a < left; ++a) {
        const Eigen::Index base = a * bd * right;
        for (Eigen::Index b = 0; b < bd; ++b) {
            for (Eigen::Index bp = 0; bp < bd; ++bp) {
                const Complex v = block(b, bp);
                if (v == Complex{}) continue;
                for (Eigen::Index c = 0; c < right; ++c) {
                    out(base + b * right + c, base + bp * right + c) = v;
                }
            }
        }
    }
    return out;
}

/// I^{(x)i} (x) X (x) I^{(x)(n-1-i)}.
inline HermitianOperator embed_at_site(const HermitianOperator& x, std::size_t site, std::size_t n,
                                       std::size_t d, std::size_t cap = kDefaultDenseCap) {
    if (static_cast<std::size_t>(x.dim()) != d) {
        throw ArgumentError("embed_at_site: operator dim " + std::to_string(x.dim()) +
                            " does not match local dimension " + std::to_string(d));
    }
    if (site >= n) {
        throw ArgumentError("site " + std::to_string(site) + " out of range [0, " +
                            std::to_string(n) + ")");
    }
    return HermitianOperator::hermitized(embed_block(x.matrix(), site, n, d, cap));
}

}  // namespace relent
