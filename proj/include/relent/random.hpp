#pragma once

// Seeded random probes: Hermitian matrices, Haar-ish unitaries, density matrices.

#include <cmath>
#include <random>

#include "relent/linalg.hpp"
#include "relent/states.hpp"

namespace relent::probe {

using Engine = std::mt19937_64;

inline Matrix ginibre(Eigen::Index d, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(normal(rng), normal(rng));
    }
    return g;
}

inline HermitianOperator random_hermitian(Eigen::Index d, Engine& rng) {
    return HermitianOperator::hermitized(ginibre(d, rng));
}

/// QR of a Ginibre matrix with the phases of R's diagonal folded back into Q.
inline Matrix random_unitary(Eigen::Index d, Engine& rng) {
    Eigen::HouseholderQR<Matrix> qr(ginibre(d, rng));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR();
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

/// Wishart state G G* / Tr, blended with I/d by `mix` to bound it away from singular.
inline DensityMatrix random_density(Eigen::Index d, Engine& rng, double mix = 0.05) {
    const Matrix g = ginibre(d, rng);
    Matrix w = g * g.adjoint();
    w /= w.trace().real();
    w = (1.0 - mix) * w + mix * Matrix::Identity(d, d) / static_cast<double>(d);
    w /= w.trace().real();
    return DensityMatrix(HermitianOperator::hermitized(w));
}

}  // namespace relent::probe
