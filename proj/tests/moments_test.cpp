#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "stablecorr/moments.hpp"
#include "test_support.hpp"

namespace stablecorr {
namespace {

constexpr double kPi = std::numbers::pi;

LevyMeasure diagonal_pair()
{
    const double h = 1.0 / std::sqrt(2.0);
    return LevyMeasure(1.0, {{1.0, {h, h}}, {1.0, {h, -h}}});
}

TEST(CpqTest, ClosedFormAnchors)
{
    EXPECT_EQ(c_pq(0.0, StableIndex(0.7)), 1.0);
    EXPECT_NEAR(c_pq(1.0, StableIndex(2.0)), 2.0 / std::sqrt(kPi), 1e-14);
    EXPECT_NEAR(c_pq(-0.5, StableIndex(1.0)), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(c_pq(-0.5, StableIndex(2.0)), std::tgamma(0.25) / std::sqrt(2.0 * kPi), 1e-14);
}

TEST(CpqTest, RejectsNonexistentMoments)
{
    EXPECT_THROW(c_pq(-1.0, StableIndex(2.0)), NonexistentExpectation);
    EXPECT_THROW(c_pq(-1.5, StableIndex(2.0)), NonexistentExpectation);
    EXPECT_THROW(c_pq(0.8, StableIndex(0.8)), NonexistentExpectation);
    EXPECT_THROW(c_pq(1.2, StableIndex(1.0)), NonexistentExpectation);
    EXPECT_NO_THROW(c_pq(5.0, StableIndex(2.0)));
    EXPECT_THROW(c_pq_oracle(1.2, StableIndex(1.0)), NonexistentExpectation);
}

TEST(CpqOracleTest, ClosedFormCrossChecks)
{
    EXPECT_NEAR(c_pq_oracle(1.0, StableIndex(2.0)) / (2.0 / std::sqrt(kPi)), 1.0, 1e-8);
    EXPECT_NEAR(c_pq_oracle(-0.5, StableIndex(1.0)) / std::sqrt(2.0), 1.0, 1e-8);
    // Value computed independently with mpmath from the same integral.
    EXPECT_NEAR(c_pq_oracle(0.5, StableIndex(0.8)) / 1.8913344338463149, 1.0, 1e-8);
}

TEST(CpqOracleTest, AgreesWithClosedFormOnGrid)
{
    for (double q : {0.8, 1.0, 1.5, 2.0}) {
        for (double p : {-0.9, -0.5, -0.1, 0.3, 0.7 * q}) {
            const double closed = c_pq(p, StableIndex(q));
            const double oracle = c_pq_oracle(p, StableIndex(q));
            EXPECT_NEAR(closed / oracle, 1.0, 1e-8) << "p=" << p << " q=" << q;
        }
    }
}

TEST(CpqOracleTest, GaussianHighMoments)
{
    for (double p : {2.5, 3.0, 4.0}) {
        EXPECT_NEAR(c_pq_oracle(p, StableIndex(2.0)) / c_pq(p, StableIndex(2.0)), 1.0, 1e-8);
    }
    // E Z^4 = 3 Var^2 = 12 for Var = 2.
    EXPECT_NEAR(c_pq(4.0, StableIndex(2.0)), 12.0, 1e-12);
}

TEST(CpqOracleTest, MonteCarloCrossCheck)
{
    const std::size_t count = 10'000'000;
    auto z = sample_standard(StableIndex(0.8), count, {201, 0});
    for (double& v : z)
        v = std::sqrt(std::abs(v));
    const auto est = summarize(z, EstimatorKind::plain, 0);
    EXPECT_NEAR(est.value, c_pq_oracle(0.5, StableIndex(0.8)), 3.0 * *est.std_error);
}

TEST(LevyExpectationTest, FirstMarginal)
{
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const LevyMeasure gamma(1.0, {{1.0, {1.0, 0.0}}});
    EXPECT_NEAR(levy_expectation(rep, gamma, 1.0), 2.0 / std::sqrt(kPi), 1e-14);
}

TEST(LevyExpectationTest, DecouplingAndReflection)
{
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 1.0}}});
    const auto gamma = diagonal_pair();
    const double c = c_pq(1.0, StableIndex(2.0));
    const double ex = levy_expectation(rep, gamma, 1.0);
    const double ey = levy_expectation(decouple(rep, BlockSplit(1)), gamma, 1.0);
    const double em = levy_expectation(reflect(rep, BlockSplit(1)), gamma, 1.0);
    EXPECT_NEAR(ex, c * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(ex, 1.595769, 1e-6);
    EXPECT_NEAR(ey, 2.0 * c, 1e-14);
    EXPECT_NEAR(ey, 2.256758, 1e-6);
    EXPECT_NEAR(em, c * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(ex + em, 2.0 * ey * std::sqrt(2.0) / 2.0, 1e-13);
    EXPECT_LT(ex + em, 2.0 * ey);
}

TEST(LevyExpectationTest, Preconditions)
{
    const SpectralRep rep(2, StableIndex(1.0), {{1.0, {1.0, 1.0}}});
    const auto gamma = diagonal_pair();
    EXPECT_THROW(levy_expectation(rep, gamma, 0.5), InvalidArgument);
    EXPECT_THROW(levy_expectation(rep, gamma, 1.0), NonexistentExpectation);
    const SpectralRep three(3, StableIndex(2.0), {{1.0, {1.0, 1.0, 0.0}}});
    EXPECT_THROW(levy_expectation(three, gamma, 1.0), DimensionMismatch);
}

TEST(LevyExpectationTest, ScalingCovariance)
{
    Engine engine = make_engine({202, 0}, 0);
    for (double q : {0.7, 1.3, 2.0}) {
        const auto rep = testing::random_rep(engine, 3, q, 4);
        std::vector<LevyEntry> entries;
        for (int m = 0; m < 5; ++m) {
            auto xi = testing::random_vector(engine, 3);
            const double norm = std::sqrt(dot(xi, xi));
            for (double& v : xi)
                v /= norm;
            entries.push_back({0.5 + m, xi});
        }
        const double p = 0.6 * q;
        const LevyMeasure gamma(p, entries);
        const double lambda = 3.7;
        std::vector<Atom> scaled(rep.atoms().begin(), rep.atoms().end());
        for (auto& atom : scaled)
            atom.weight *= lambda;
        const SpectralRep rep_scaled(3, rep.index(), scaled);
        EXPECT_NEAR(levy_expectation(rep_scaled, gamma, p),
                    std::pow(lambda, p / q) * levy_expectation(rep, gamma, p),
                    1e-12 * levy_expectation(rep_scaled, gamma, p));
    }
}

TEST(LevyExpectationTest, AgreesWithMonteCarlo)
{
    Engine engine = make_engine({203, 0}, 0);
    for (int trial = 0; trial < 3; ++trial) {
        const auto rep = testing::random_rep(engine, 3, 2.0, 3 + trial);
        std::vector<LevyEntry> entries;
        for (int m = 0; m < 6; ++m) {
            auto xi = testing::random_vector(engine, 3);
            const double norm = std::sqrt(dot(xi, xi));
            for (double& v : xi)
                v /= norm;
            entries.push_back({1.0 + 0.3 * m, xi});
        }
        const LevyMeasure gamma(1.0, entries);
        const auto est = mc_expectation(norm_from_levy(gamma), rep, 100000, {203, 1u + trial});
        ASSERT_EQ(est.estimator, EstimatorKind::plain);
        EXPECT_NEAR(est.value, levy_expectation(rep, gamma, 1.0), 3.0 * *est.std_error);
    }
}

TEST(NormFromLevyTest, CoordinateAtomsGiveL1)
{
    const LevyMeasure gamma(1.0, {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto f = norm_from_levy(gamma);
    EXPECT_DOUBLE_EQ(evaluate(f, Vector{3.0, -4.0}), 7.0);
    EXPECT_EQ(f.exponent(), 1.0);
}

TEST(NormFromLevyTest, UniformCircleIsEuclidean)
{
    std::vector<LevyEntry> entries;
    for (int m = 0; m < 64; ++m) {
        const double t = 2.0 * kPi * m / 64.0;
        entries.push_back({1.0 / 64.0, {std::cos(t), std::sin(t)}});
    }
    const auto f = norm_from_levy(LevyMeasure(2.0, entries));
    Engine engine = make_engine({204, 0}, 0);
    const double ratio = evaluate(f, Vector{1.0, 0.0});
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = testing::random_vector(engine, 2);
        EXPECT_NEAR(evaluate(f, x) / std::sqrt(dot(x, x)) / ratio, 1.0, 1e-6);
    }
}

TEST(NormFromLevyTest, RejectsNonSpanning)
{
    EXPECT_THROW(norm_from_levy(LevyMeasure(1.0, {{1.0, {1.0, 0.0}}})), InvalidArgument);
}

TEST(McExpectationTest, GaussianSecondMoment)
{
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto est = mc_expectation(euclidean_power(2, 2.0), rep, 1'000'000, {205, 0});
    EXPECT_EQ(est.estimator, EstimatorKind::plain);
    EXPECT_NEAR(est.value, 4.0, 3.0 * *est.std_error);
    EXPECT_EQ(est.n_samples, 1'000'000u);
    EXPECT_EQ(est.rep_hash, rep.hash());
}

TEST(McExpectationTest, RankOneReduction)
{
    struct Case
    {
        double q;
        double p;
        double w;
        Vector a;
        HomogeneousFn f;
    };
    const std::vector<Case> cases = {
        {2.0, -0.4, 1.0, {1.0, 1.0}, max_abs_power(2, -0.4)},
        {1.5, -0.3, 2.0, {1.0, -2.0}, l1_power(2, -0.3)},
        {1.0, 0.3, 0.5, {0.5, 1.0, -1.0}, euclidean_power(3, 0.3)},
        {0.7, -0.2, 1.5, {2.0, 1.0, 1.0}, max_abs_power(3, -0.2)},
    };
    std::uint64_t stream = 0;
    for (const auto& c : cases) {
        const SpectralRep rep(c.a.size(), StableIndex(c.q), {{c.w, c.a}});
        const auto est = mc_expectation(c.f, rep, 400000, {206, stream++});
        const double exact = std::pow(c.w, c.p / c.q) * c_pq(c.p, StableIndex(c.q)) * evaluate(c.f, c.a);
        EXPECT_NEAR(est.value, exact, 3.0 * est.uncertainty()) << "q=" << c.q << " p=" << c.p;
    }
}

TEST(McExpectationTest, RankOneDivergentOrderRejected)
{
    // X_1 = X_2: max|X_i|^-1.5 = |X_1|^-1.5 is not integrable.
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 1.0}}});
    EXPECT_THROW(mc_expectation(max_abs_power(2, -1.5), rep, 1000, {207, 0}), NonexistentExpectation);
}

TEST(McExpectationTest, InfiniteVarianceNeedsMedianOfMeans)
{
    const SpectralRep rep(2, StableIndex(1.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto f = max_abs_power(2, -1.5);
    EstimatorRequest plain;
    plain.mode = EstimatorRequest::Mode::plain;
    EXPECT_THROW(mc_expectation(f, rep, 1000, {208, 0}, plain), InvalidArgument);
    const auto est = mc_expectation(f, rep, 100000, {208, 0});
    EXPECT_EQ(est.estimator, EstimatorKind::median_of_means);
    EXPECT_EQ(est.blocks, 32u);
    EXPECT_FALSE(est.std_error.has_value());
    EXPECT_TRUE(est.deviation_bound.has_value());

    EstimatorRequest mom;
    mom.mode = EstimatorRequest::Mode::median_of_means;
    EXPECT_THROW(mc_expectation(f, rep, 40, {208, 0}, mom), InvalidArgument);
}

TEST(ParetoTailTest, ExactParetoKeepsTheFullFraction)
{
    Engine engine = make_engine({211, 0}, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double alpha = 1.5;
    std::vector<double> v(100000);
    for (double& x : v)
        x = std::pow(1.0 - unif(engine), -1.0 / alpha);
    const auto tc = replace_pareto_tail(v, alpha, 1e-2);
    EXPECT_EQ(tc.replaced, 1000u);
    EXPECT_NEAR(tc.hill_ratio, 1.0, 3.0 / std::sqrt(1000.0));
    // Conditional means above T are exact, so the mean stays near alpha / (alpha - 1).
    double mean = 0.0;
    for (double x : v)
        mean += x / static_cast<double>(v.size());
    EXPECT_NEAR(mean, 3.0, 0.05);

    std::vector<double> small(10, 2.0);
    EXPECT_THROW(replace_pareto_tail(small, 0.8, 0.1), InvalidArgument);
    EXPECT_THROW(replace_pareto_tail(small, 1.5, 0.6), InvalidArgument);
}

TEST(ParetoTailTest, ShrinksUntilTheTailIsPareto)
{
    // A shifted Pareto law: the tail index is only reached far out.
    Engine engine = make_engine({212, 0}, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double alpha = 1.5;
    std::vector<double> v(1000000);
    for (double& x : v)
        x = 10.0 + std::pow(1.0 - unif(engine), -1.0 / alpha);
    const auto tc = replace_pareto_tail(v, alpha, 1e-2);
    EXPECT_LT(tc.replaced, 10000u);
    EXPECT_GE(tc.replaced, 32u);
    EXPECT_NEAR(tc.hill_ratio, 1.0, 3.0 / std::sqrt(static_cast<double>(tc.replaced)));
}

TEST(McExpectationTest, InfiniteVarianceUsesTailCorrection)
{
    // Rank 2, p = -1.5: f(X) has tail index 4/3.
    const SpectralRep rep(2, StableIndex(1.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto est = mc_expectation(max_abs_power(2, -1.5), rep, 200000, {213, 0});
    ASSERT_TRUE(est.tail.has_value());
    EXPECT_DOUBLE_EQ(est.tail->index, 4.0 / 3.0);
    EXPECT_GT(est.tail->replaced, 0u);
    EstimatorRequest off;
    off.tail_fraction = 0.0;
    EXPECT_FALSE(mc_expectation(max_abs_power(2, -1.5), rep, 200000, {213, 0}, off).tail.has_value());
    // Finite variance: no correction.
    EXPECT_FALSE(mc_expectation(max_abs_power(2, -0.5), rep, 20000, {213, 1}).tail.has_value());
}

TEST(McExpectationTest, PositiveOrderBeyondIndexRejected)
{
    const SpectralRep rep(2, StableIndex(1.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    EXPECT_THROW(mc_expectation(euclidean_power(2, 1.0), rep, 1000, {209, 0}), NonexistentExpectation);
    EXPECT_THROW(mc_expectation(euclidean_power(3, -1.0), rep, 1000, {209, 0}), DimensionMismatch);
}

TEST(McExpectationTest, DeterministicAcrossWorkers)
{
    const SpectralRep rep(2, StableIndex(1.4), {{1.0, {1.0, 0.2}}, {1.0, {0.3, 1.0}}});
    const auto f = l1_power(2, -0.7);
    const auto a = mc_expectation(f, rep, 50000, {210, 0}, {}, 1);
    const auto b = mc_expectation(f, rep, 50000, {210, 0}, {}, 3);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

}  // namespace
}  // namespace stablecorr
