#include <cmath>

#include <gtest/gtest.h>

#include "stablecorr/homogeneous.hpp"
#include "test_support.hpp"

namespace stablecorr {
namespace {

TEST(EvaluateTest, WorkedExamples)
{
    EXPECT_NEAR(evaluate(max_abs_power(2, -1.5), Vector{2.0, -1.0}), std::pow(2.0, -1.5), 1e-15);
    EXPECT_DOUBLE_EQ(evaluate(l1_power(2, 2.0), Vector{3.0, 4.0}), 49.0);
    EXPECT_DOUBLE_EQ(evaluate(euclidean_power(2, 1.0), Vector{3.0, 4.0}), 5.0);
}

TEST(EvaluateTest, Origin)
{
    EXPECT_THROW(evaluate(max_abs_power(2, -1.5), Vector{0.0, 0.0}), InvalidArgument);
    EXPECT_EQ(evaluate(l1_power(2, 0.5), Vector{0.0, 0.0}), 0.0);
    EXPECT_THROW(evaluate(l1_power(2, 0.5), Vector{1.0}), DimensionMismatch);
}

TEST(EvaluateTest, ScalingByThree)
{
    Engine engine = make_engine({301, 0}, 0);
    const std::vector<HomogeneousFn> fns = {
        max_abs_power(3, -1.5), l1_power(3, 0.7), euclidean_power(3, -2.2),
        lr_power({{1.0, 0.0, 0.5}, {0.0, 1.0, 0.0}, {0.3, -1.0, 1.0}, {1.0, 1.0, 1.0}}, 0.8, -1.1)};
    for (const auto& f : fns) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto x = testing::random_vector(engine, 3);
            Vector x3(x);
            for (double& v : x3)
                v *= 3.0;
            EXPECT_NEAR(evaluate(f, x3) / evaluate(f, x), std::pow(3.0, f.exponent()),
                        1e-12 * std::pow(3.0, f.exponent()));
        }
    }
}

TEST(HomogeneousFnTest, ValidatesDescriptor)
{
    EXPECT_THROW(HomogeneousFn(MaxAbsNorm{2}, 0.0), InvalidArgument);
    EXPECT_THROW(HomogeneousFn(EuclideanNorm{{1.0, 0.0}}, 1.0), InvalidArgument);
    EXPECT_THROW(lr_power({{1.0, 0.0}, {2.0, 0.0}}, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(lr_power({{1.0, 0.0}, {0.0, 1.0}}, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(HomogeneousFn(MaxAbsNorm{3}, -1.0, 3), InvalidArgument);
    EXPECT_THROW(HomogeneousFn(LevyNorm{LevyMeasure(1.0, {{1.0, {1.0, 0.0}}})}, 1.0),
                 InvalidArgument);
}

TEST(BlockSymmetryTest, CoordinateAndEuclideanPass)
{
    for (std::size_t k = 1; k < 4; ++k) {
        EXPECT_TRUE(check_block_symmetry(max_abs_power(4, -3.5), BlockSplit(k), 200, {302, k}).passed);
        EXPECT_TRUE(check_block_symmetry(euclidean_power(4, -1.0), BlockSplit(k), 200, {303, k}).passed);
        EXPECT_TRUE(check_block_symmetry(l1_power(4, 0.5), BlockSplit(k), 200, {304, k}).passed);
    }
}

TEST(BlockSymmetryTest, ObliqueLevyDirectionFails)
{
    const double h = 1.0 / std::sqrt(2.0);
    const LevyMeasure gamma(1.0, {{1.0, {h, h}}, {1.0, {1.0, 0.0}}});
    const HomogeneousFn f(LevyNorm{gamma}, 1.0);
    const auto check = check_block_symmetry(f, BlockSplit(1), 100, {305, 0});
    EXPECT_FALSE(check.passed);
    ASSERT_TRUE(check.witness.has_value());
    const Vector& w = *check.witness;
    const Vector flipped{w[0], -w[1]};
    EXPECT_GT(std::abs(evaluate(f, w) - evaluate(f, flipped)), 1e-10 * evaluate(f, w));
}

TEST(BlockSymmetryTest, SymmetrizedLevyPasses)
{
    const double h = 1.0 / std::sqrt(2.0);
    const LevyMeasure gamma(1.0, {{1.0, {h, h}}, {1.0, {h, -h}}});
    EXPECT_TRUE(gamma.is_block_symmetric(1));
    EXPECT_TRUE(check_block_symmetry(HomogeneousFn(LevyNorm{gamma}, -1.5), BlockSplit(1), 100, {306, 0})
                    .passed);
}

TEST(HomogeneityTest, DeclaredExponentsRecovered)
{
    const auto a = check_homogeneity(l1_power(3, -1.2), 200, {307, 0});
    EXPECT_TRUE(a.passed);
    EXPECT_NEAR(a.measured, -1.2, 1e-9);
    const auto b = check_homogeneity(max_abs_power(2, 0.5), 200, {308, 0});
    EXPECT_TRUE(b.passed);
    EXPECT_NEAR(b.measured, 0.5, 1e-9);
}

TEST(HomogeneityTest, CorruptedDescriptorFails)
{
    const auto base = l1_power(2, 1.0);
    const auto check = measure_homogeneity(
        [&](std::span<const double> x) {
            const double v = evaluate(base, x);
            return v * v;
        },
        2, 1.0, 200, {309, 0});
    EXPECT_FALSE(check.passed);
    EXPECT_NEAR(check.measured, 2.0, 1e-9);
}

TEST(HomogeneityTest, EveryConstructorPasses)
{
    Engine engine = make_engine({310, 0}, 0);
    std::vector<LevyEntry> entries;
    for (int m = 0; m < 5; ++m) {
        auto xi = testing::random_vector(engine, 3);
        const double norm = std::sqrt(dot(xi, xi));
        for (double& v : xi)
            v /= norm;
        entries.push_back({1.0 + m, xi});
    }
    const std::vector<HomogeneousFn> fns = {
        max_abs_power(3, -2.5),
        l1_power(3, 1.7),
        HomogeneousFn(EuclideanNorm{{1.0, 2.0, 0.5}}, -0.3),
        lr_power({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, -1.0, 2.0}}, 0.6, -1.4),
        HomogeneousFn(LevyNorm{LevyMeasure(0.7, entries)}, -0.9),
    };
    for (const auto& f : fns)
        EXPECT_TRUE(check_homogeneity(f, 100, {310, 1}).passed) << norm_kind(f.base());
}

TEST(PdCertificateTest, Windows)
{
    EXPECT_TRUE(pd_certificate(max_abs_power(2, -1.5)).has_value());
    EXPECT_TRUE(pd_certificate(max_abs_power(3, -2.5)).has_value());
    EXPECT_TRUE(pd_certificate(euclidean_power(3, -0.5)).has_value());
    EXPECT_TRUE(pd_certificate(lr_power({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, 1.5, -0.5)).has_value());
    EXPECT_FALSE(pd_certificate(max_abs_power(3, -0.5)).has_value());
    EXPECT_FALSE(pd_certificate(l1_power(2, 0.5)).has_value());
    EXPECT_FALSE(pd_certificate(lr_power({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}, 3.0, -0.5))
                     .has_value());
}

}  // namespace
}  // namespace stablecorr
