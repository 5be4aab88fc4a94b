#include <cmath>

#include <gtest/gtest.h>

#include "relent/entropies.hpp"
#include "relent/linalg.hpp"
#include "relent/random.hpp"
#include "test_support.hpp"

using namespace relent;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

TEST(SpectralDecompose, IdentityHasUnitEigenvalues) {
    const auto dec = spectral_decompose(HermitianOperator::identity(2));
    EXPECT_NEAR(dec.eigenvalues[0], 1.0, 1e-15);
    EXPECT_NEAR(dec.eigenvalues[1], 1.0, 1e-15);
    EXPECT_LT(max_norm(dec.eigenvectors.adjoint() * dec.eigenvectors - Matrix::Identity(2, 2)), 1e-10);
}

TEST(SpectralDecompose, DiagonalKeepsStandardBasis) {
    const auto dec = spectral_decompose(HermitianOperator(diag2(0.0, 1.0)));
    EXPECT_EQ(dec.eigenvalues[0], 0.0);
    EXPECT_EQ(dec.eigenvalues[1], 1.0);
    EXPECT_NEAR(std::abs(dec.eigenvectors(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(dec.eigenvectors(1, 1)), 1.0, 1e-15);
}

TEST(SpectralDecompose, RunningExampleXHasUnitDeterminant) {
    const DensityMatrix rho = fixture::running_rho();
    const DensityMatrix sigma = fixture::running_sigma();
    const auto det2 = [](const Matrix& m) { return (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real(); };
    const double expected = det2(sigma.matrix()) / det2(rho.matrix());
    EXPECT_NEAR(expected, 1.0, 1e-12);

    const auto dec = spectral_decompose(x_operator(rho, sigma));
    EXPECT_GT(dec.eigenvalues[0], 0.0);
    EXPECT_GT(dec.eigenvalues[1], 0.0);
    EXPECT_NEAR(dec.eigenvalues[0] * dec.eigenvalues[1], expected, 1e-9);
}

TEST(SpectralDecompose, RejectsNonHermitian) {
    Matrix m(2, 2);
    m << 1, 2, 0, 1;
    EXPECT_THROW(HermitianOperator{m}, ValidationError);
    Matrix rect = Matrix::Zero(2, 3);
    EXPECT_THROW(HermitianOperator{rect}, ValidationError);
}

TEST(SpectralDecompose, ToleratesRoundoffAsymmetry) {
    Matrix m(2, 2);
    m << 1.0, Complex(0.5, 1e-12), Complex(0.5, -1e-12), 2.0;
    m(1, 0) += 1e-12;
    EXPECT_NO_THROW(HermitianOperator{m});
}

TEST(SpectralDecompose, RandomHermitianInvariants) {
    probe::Engine rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index d = 1 + trial % 6;
        const HermitianOperator a = probe::random_hermitian(d, rng);
        const auto dec = spectral_decompose(a);
        for (Eigen::Index i = 1; i < d; ++i) EXPECT_LE(dec.eigenvalues[i - 1], dec.eigenvalues[i]);
        EXPECT_LT(max_norm(dec.eigenvectors.adjoint() * dec.eigenvectors - Matrix::Identity(d, d)), 1e-10);
        EXPECT_LT(max_norm(dec.reconstruct() - a.matrix()), 1e-9 * static_cast<double>(d));
    }
}

TEST(MatrixFunction, IdentityFunctionReconstructs) {
    probe::Engine rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index d = 2 + trial % 4;
        const HermitianOperator a = probe::random_hermitian(d, rng);
        const auto back = matrix_function(spectral_decompose(a), [](double t) { return t; });
        EXPECT_LT(max_norm(back.matrix() - a.matrix()), 1e-9 * static_cast<double>(d));
    }
}

TEST(MatrixFunction, XlogXOfIdentityIsZero) {
    const auto out = matrix_function(spectral_decompose(HermitianOperator::identity(3)), xlogx);
    EXPECT_EQ(max_norm(out.matrix()), 0.0);
}

TEST(MatrixFunction, InverseSqrtOfGibbsDiagonal) {
    const auto out = matrix_function(spectral_decompose(HermitianOperator(diag2(fixture::kP, 1.0 - fixture::kP))),
                                     [](double t) { return 1.0 / std::sqrt(t); });
    EXPECT_NEAR(out.matrix()(0, 0).real(), fixture::frozen::inv_sqrt_p, 1e-11);
    EXPECT_NEAR(out.matrix()(1, 1).real(), fixture::frozen::inv_sqrt_1mp, 1e-11);
    EXPECT_NEAR(std::abs(out.matrix()(0, 1)), 0.0, 1e-15);
}

TEST(MatrixFunction, Composition) {
    probe::Engine rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix g = probe::ginibre(4, rng);
        const HermitianOperator a = HermitianOperator::hermitized(g * g.adjoint());
        const auto f = [](double t) { return std::sqrt(t); };
        const auto g2 = [](double t) { return std::exp(-t); };
        const auto stepwise = matrix_function(spectral_decompose(matrix_function(clip_psd(spectral_decompose(a)), f)), g2);
        const auto direct = matrix_function(clip_psd(spectral_decompose(a)), [&](double t) { return g2(f(t)); });
        EXPECT_LT(max_norm(stepwise.matrix() - direct.matrix()), 1e-8);
    }
}

TEST(MatrixFunction, LogOfNegativeEigenvalueIsDomainError) {
    const auto dec = spectral_decompose(HermitianOperator(diag2(-0.5, 1.0)));
    EXPECT_THROW(matrix_function(dec, [](double t) { return std::log(t); }), DomainError);
}

TEST(ClipPsd, SnapsRoundoffAndRejectsIndefinite) {
    auto small = clip_psd(spectral_decompose(HermitianOperator(diag2(-5e-11, 1.0))));
    EXPECT_EQ(small.eigenvalues[0], 0.0);
    EXPECT_THROW(clip_psd(spectral_decompose(HermitianOperator(diag2(-1e-9, 1.0)))), ValidationError);
}

TEST(Kron, Examples) {
    const Matrix i2 = Matrix::Identity(2, 2);
    EXPECT_EQ(max_norm(kron(i2, i2) - Matrix::Identity(4, 4)), 0.0);

    const Matrix k = kron(diag2(2.0, 3.0), diag2(5.0, 7.0));
    EXPECT_EQ(k.diagonal().real(), (Eigen::Vector4d() << 10.0, 14.0, 15.0, 21.0).finished());
    EXPECT_EQ(max_norm(k - Matrix(k.diagonal().asDiagonal())), 0.0);

    probe::Engine rng(5);
    const Matrix a = probe::random_hermitian(2, rng).matrix();
    const Matrix b = probe::random_hermitian(3, rng).matrix();
    EXPECT_NEAR(std::abs(kron(a, b).trace() - a.trace() * b.trace()), 0.0, 1e-12);
}

TEST(Kron, MixedProductAndAssociativity) {
    probe::Engine rng(9);
    const Matrix a = probe::ginibre(2, rng), b = probe::ginibre(3, rng);
    const Matrix c = probe::ginibre(2, rng), d = probe::ginibre(3, rng);
    EXPECT_LT(max_norm(kron(a, b) * kron(c, d) - kron(a * c, b * d)), 1e-12);
    const Matrix e = probe::ginibre(2, rng);
    EXPECT_LT(max_norm(kron(kron(a, b), e) - kron(a, kron(b, e))), 1e-12);
}

TEST(Kron, CapacityError) {
    const Matrix a = Matrix::Identity(8, 8);
    EXPECT_THROW(kron(a, a, 63), CapacityError);
    EXPECT_NO_THROW(kron(a, a, 64));
    EXPECT_THROW(kron_power(Matrix::Identity(2, 2), 15), CapacityError);
}

TEST(EmbedAtSite, Examples) {
    probe::Engine rng(13);
    const HermitianOperator x = probe::random_hermitian(2, rng);
    EXPECT_EQ(max_norm(embed_at_site(x, 0, 1, 2).matrix() - x.matrix()), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(max_norm(embed_at_site(HermitianOperator::identity(2), i, 4, 2).matrix() - Matrix::Identity(16, 16)), 0.0);
        EXPECT_NEAR(embed_at_site(x, i, 4, 2).trace(), 8.0 * x.trace(), 1e-12);
    }
}

TEST(EmbedAtSite, MatchesExplicitKronecker) {
    probe::Engine rng(17);
    const HermitianOperator x = probe::random_hermitian(3, rng);
    const Matrix i3 = Matrix::Identity(3, 3);
    EXPECT_EQ(max_norm(embed_at_site(x, 1, 3, 3).matrix() - kron(kron(i3, x.matrix()), i3)), 0.0);
}

TEST(EmbedAtSite, DistinctSitesCommute) {
    probe::Engine rng(19);
    const HermitianOperator x = probe::random_hermitian(2, rng);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            const Matrix a = embed_at_site(x, i, 4, 2).matrix();
            const Matrix b = embed_at_site(x, j, 4, 2).matrix();
            EXPECT_LT(max_norm(a * b - b * a), 1e-10);
        }
    }
}

TEST(EmbedAtSite, Errors) {
    const HermitianOperator x = HermitianOperator::identity(2);
    EXPECT_THROW(embed_at_site(x, 3, 3, 2), ArgumentError);
    EXPECT_THROW(embed_at_site(x, 0, 3, 3), ArgumentError);
    EXPECT_THROW(embed_at_site(x, 0, 15, 2), CapacityError);
    EXPECT_THROW(embed_at_site(x, 0, 5, 2, 16), CapacityError);
    EXPECT_NO_THROW(embed_at_site(x, 0, 5, 2, 32));
}

TEST(EmbedBlock, TwoSiteBlock) {
    probe::Engine rng(23);
    const Matrix blk = probe::random_hermitian(4, rng).matrix();
    const Matrix i2 = Matrix::Identity(2, 2);
    EXPECT_EQ(max_norm(embed_block(blk, 1, 4, 2) - kron(kron(i2, blk), i2)), 0.0);
    EXPECT_THROW(embed_block(blk, 3, 4, 2), ArgumentError);
    EXPECT_THROW(embed_block(probe::ginibre(3, rng), 0, 4, 2), ArgumentError);
}

}  // namespace
