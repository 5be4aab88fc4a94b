#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "relent/weights.hpp"

using namespace relent;

namespace {

TEST(Row, BuiltInExamples) {
    EXPECT_EQ(WeightScheme::uniform().row(4), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
    const auto tri = WeightScheme::triangular().row(3);
    EXPECT_NEAR(tri[0], 1.0 / 6.0, 1e-16);
    EXPECT_NEAR(tri[1], 2.0 / 6.0, 1e-16);
    EXPECT_NEAR(tri[2], 3.0 / 6.0, 1e-16);
    EXPECT_EQ(WeightScheme::fixed_site().row(5), (std::vector<double>{1, 0, 0, 0, 0}));
    EXPECT_EQ(WeightScheme::window(2).row(5), (std::vector<double>{0, 0, 0, 0.5, 0.5}));
    EXPECT_EQ(WeightScheme::window(3).row(2), (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(WeightScheme::growing_window().row(5), (std::vector<double>{0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3}));
    const auto geo = WeightScheme::geometric(0.5).row(3);
    EXPECT_NEAR(geo[0], 4.0 / 7.0, 1e-16);
    EXPECT_NEAR(geo[2], 1.0 / 7.0, 1e-16);
}

TEST(Row, CustomRowsAndErrors) {
    const auto s = WeightScheme::custom({{1, {1.0}}, {3, {0.2, 0.3, 0.5}}});
    EXPECT_EQ(s.row(3), (std::vector<double>{0.2, 0.3, 0.5}));
    EXPECT_THROW(s.row(2), ArgumentError);
    EXPECT_THROW(WeightScheme::custom({{2, {0.5, 0.6}}}), ValidationError);
    EXPECT_THROW(WeightScheme::custom({{2, {1.5, -0.5}}}), ValidationError);
    EXPECT_THROW(WeightScheme::custom({{3, {0.5, 0.5}}}), ValidationError);
    EXPECT_THROW(WeightScheme::uniform().row(0), ArgumentError);
    EXPECT_THROW(WeightScheme::geometric(1.0), ArgumentError);
    EXPECT_THROW(WeightScheme::window(0), ArgumentError);
}

TEST(Row, InvariantHoldsUpToOneMillion) {
    const std::vector<WeightScheme> schemes{WeightScheme::uniform(), WeightScheme::triangular(),
                                            WeightScheme::window(7), WeightScheme::growing_window(),
                                            WeightScheme::fixed_site(), WeightScheme::geometric(0.9)};
    std::mt19937_64 rng(41);
    std::vector<std::size_t> lengths{1, 2, 3, 1000, 999983, 1000000};
    for (int i = 0; i < 10; ++i) lengths.push_back(1 + rng() % 200000);
    for (const auto& s : schemes) {
        for (std::size_t n : lengths) {
            const auto r = s.row(n);
            ASSERT_EQ(r.size(), n);
            EXPECT_NO_THROW(WeightScheme::check_row(r)) << s.name() << " n=" << n;
        }
    }
}

TEST(Row, Exchangeability) {
    EXPECT_TRUE(WeightScheme::uniform().exchangeable(1000));
    EXPECT_FALSE(WeightScheme::triangular().exchangeable(2));
    EXPECT_TRUE(WeightScheme::triangular().exchangeable(1));
    EXPECT_TRUE(WeightScheme::window(4).exchangeable(3));
    EXPECT_FALSE(WeightScheme::window(4).exchangeable(5));
}

TEST(Regularity, UniformClosedForms) {
    const auto rep = regularity_diagnostics(WeightScheme::uniform(), 100);
    for (std::size_t n = 1; n <= 100; ++n) {
        const double inv = 1.0 / static_cast<double>(n);
        EXPECT_NEAR(rep.variation_sums[n - 1], inv, 1e-15);
        EXPECT_NEAR(rep.max_entries[n - 1], inv, 1e-15);
        EXPECT_NEAR(rep.row_sums[n - 1], 1.0, 1e-12);
    }
    EXPECT_EQ(rep.analytic_class, AnalyticClass::strongly_regular);
    EXPECT_TRUE(rep.decay_evident());
    EXPECT_TRUE(rep.consistent());
}

TEST(Regularity, TriangularClosedForm) {
    const auto rep = regularity_diagnostics(WeightScheme::triangular(), 60);
    for (std::size_t n = 1; n <= 60; ++n) {
        const double nd = static_cast<double>(n);
        EXPECT_NEAR(rep.variation_sums[n - 1], 2.0 * (nd - 1.0) / (nd * (nd + 1.0)) + 2.0 / (nd + 1.0), 1e-14);
    }
    EXPECT_TRUE(rep.decay_evident());
}

TEST(Regularity, FixedSiteIsNotRegular) {
    const auto rep = regularity_diagnostics(WeightScheme::fixed_site(), 50);
    for (double m : rep.max_entries) EXPECT_EQ(m, 1.0);
    EXPECT_EQ(rep.analytic_class, AnalyticClass::not_regular);
    EXPECT_FALSE(rep.decay_evident());
    EXPECT_TRUE(rep.consistent());
}

TEST(Regularity, FixedWindowVariationStaysOne) {
    const auto rep = regularity_diagnostics(WeightScheme::window(2), 40);
    EXPECT_NEAR(rep.variation_sums[1], 0.5, 1e-15);  // n = 2: the window fills the row
    for (std::size_t n = 3; n <= 40; ++n) EXPECT_NEAR(rep.variation_sums[n - 1], 1.0, 1e-15);
    EXPECT_EQ(rep.analytic_class, AnalyticClass::regular_not_strongly);
    EXPECT_FALSE(rep.decay_evident());
    EXPECT_TRUE(rep.consistent());
}

TEST(Regularity, GrowingWindowVariation) {
    const auto rep = regularity_diagnostics(WeightScheme::growing_window(), 200);
    for (std::size_t n = 2; n <= 200; ++n) {
        const std::size_t w = ceil_sqrt(n);
        if (w < n) EXPECT_NEAR(rep.variation_sums[n - 1], 2.0 / static_cast<double>(w), 1e-14);
    }
    EXPECT_TRUE(rep.decay_evident());
    EXPECT_TRUE(rep.consistent());
}

TEST(Regularity, GeometricFirstColumnDoesNotVanish) {
    const double r = 0.5;
    const auto rep = regularity_diagnostics(WeightScheme::geometric(r), 20);
    for (std::size_t n = 1; n <= 20; ++n) {
        EXPECT_NEAR(rep.first_entries[n - 1], (1.0 - r) / (1.0 - std::pow(r, static_cast<double>(n))), 1e-15);
    }
    EXPECT_NEAR(rep.first_entries.back(), 0.5, 1e-6);
    EXPECT_FALSE(rep.decay_evident());
    EXPECT_TRUE(rep.consistent());
}

TEST(Regularity, RequiresHorizonTwo) {
    EXPECT_THROW(regularity_diagnostics(WeightScheme::uniform(), 1), ArgumentError);
}

TEST(Helpers, CeilSqrtAndCompensatedSum) {
    EXPECT_EQ(ceil_sqrt(1), 1u);
    EXPECT_EQ(ceil_sqrt(4), 2u);
    EXPECT_EQ(ceil_sqrt(5), 3u);
    EXPECT_EQ(ceil_sqrt(1000000), 1000u);
    std::vector<double> tiny(1000000, 1e-6);
    EXPECT_NEAR(compensated_sum(tiny), 1.0, 1e-15);
}

}  // namespace
