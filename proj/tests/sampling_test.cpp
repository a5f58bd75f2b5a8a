#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "stablecorr/sampling.hpp"
#include "test_support.hpp"

namespace stablecorr {
namespace {

constexpr std::size_t kDraws = 100000;
const double kCfBound = 4.0 / std::sqrt(static_cast<double>(kDraws));

double empirical_cf_1d(const std::vector<double>& z, double t)
{
    double s = 0.0;
    for (double v : z)
        s += std::cos(t * v);
    return s / static_cast<double>(z.size());
}

TEST(SampleStandardTest, GaussianCharFn)
{
    const auto z = sample_standard(StableIndex(2.0), kDraws, {101, 0});
    EXPECT_NEAR(empirical_cf_1d(z, 1.0), std::exp(-1.0), 0.013);
}

TEST(SampleStandardTest, CauchyMedianOfAbs)
{
    auto z = sample_standard(StableIndex(1.0), kDraws, {102, 0});
    for (double& v : z)
        v = std::abs(v);
    std::nth_element(z.begin(), z.begin() + kDraws / 2, z.end());
    EXPECT_NEAR(z[kDraws / 2], 1.0, 0.02);
}

TEST(SampleStandardTest, SmallIndexCharFn)
{
    const auto z = sample_standard(StableIndex(0.5), kDraws, {103, 0});
    EXPECT_NEAR(empirical_cf_1d(z, 2.0), std::exp(-std::sqrt(2.0)), 0.013);
}

TEST(SampleStandardTest, GaussianKolmogorovSmirnov)
{
    auto z = sample_standard(StableIndex(2.0), kDraws, {104, 0});
    std::sort(z.begin(), z.end());
    double d = 0.0;
    const double n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-z[i] / 2.0);  // N(0, 2)
        d = std::max({d, std::abs(cdf - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(i + 1) / n - cdf)});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(SampleStandardTest, RejectsEmpty)
{
    EXPECT_THROW(sample_standard(StableIndex(1.0), 0, {1, 0}), InvalidArgument);
}

TEST(SampleVectorTest, IndependentGaussianCovariance)
{
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto batch = sample_batch(rep, kDraws, {105, 0}, 1);
    double c[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        auto x = batch.point(i);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                c[a][b] += x[a] * x[b];
    }
    EXPECT_NEAR(c[0][0] / kDraws, 2.0, 0.05);
    EXPECT_NEAR(c[1][1] / kDraws, 2.0, 0.05);
    EXPECT_NEAR(c[0][1] / kDraws, 0.0, 0.05);
}

TEST(SampleVectorTest, RankOneAtomGivesEqualCoordinates)
{
    const SpectralRep rep(2, StableIndex(2.0), {{1.0, {1.0, 1.0}}});
    Engine engine = make_engine({106, 0}, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto x = sample_vector(rep, engine);
        EXPECT_EQ(x[0], x[1]);
    }
}

TEST(SampleVectorTest, EmpiricalCharFnMatchesAnalytic)
{
    Engine engine = make_engine({107, 0}, 0);
    const auto rep = testing::random_rep(engine, 3, 1.3, 5);
    const auto batch = sample_batch(rep, kDraws, {107, 1});
    for (int k = 0; k < 20; ++k) {
        const auto xi = testing::random_vector(engine, 3, 0.5);
        EXPECT_NEAR(testing::empirical_cf(batch, xi), char_fn(rep, xi), kCfBound) << "xi #" << k;
    }
}

TEST(SampleBatchTest, IndependentOfWorkerCount)
{
    Engine engine = make_engine({108, 0}, 0);
    const auto rep = testing::random_rep(engine, 3, 0.9, 4);
    const auto one = sample_batch(rep, 3 * kChunkSize + 17, {108, 3}, 1);
    const auto eight = sample_batch(rep, 3 * kChunkSize + 17, {108, 3}, 8);
    EXPECT_EQ(one.data, eight.data);
    EXPECT_EQ(one.rep_hash, rep.hash());
    EXPECT_EQ(one.rows(), 3 * kChunkSize + 17);
}

TEST(SampleBatchTest, PrefixConsistentAcrossCounts)
{
    const SpectralRep rep(2, StableIndex(1.5), {{1.0, {1.0, 0.5}}, {2.0, {0.0, 1.0}}});
    const auto small = sample_batch(rep, 100, {109, 0}, 1);
    const auto large = sample_batch(rep, 10000, {109, 0}, 4);
    EXPECT_TRUE(std::equal(small.data.begin(), small.data.end(), large.data.begin()));
}

TEST(SampleBatchTest, RejectsEmpty)
{
    const SpectralRep rep(2, StableIndex(1.5), {{1.0, {1.0, 0.5}}});
    EXPECT_THROW(sample_batch(rep, 0, {1, 0}), InvalidArgument);
}

TEST(SampleBatchTest, DistinctStreamsLookIndependent)
{
    const SpectralRep rep(2, StableIndex(1.2), {{1.0, {1.0, 0.3}}, {0.7, {-0.4, 1.0}}});
    const auto a = sample_batch(rep, kDraws, {110, 0});
    const auto b = sample_batch(rep, kDraws, {110, 1});
    ASSERT_NE(a.data, b.data);
    Engine engine = make_engine({110, 99}, 0);
    for (int k = 0; k < 10; ++k) {
        const auto xi = testing::random_vector(engine, 2, 0.6);
        const auto eta = testing::random_vector(engine, 2, 0.6);
        // E exp(i(xi, X) + i(eta, X')) = cf(xi) cf(eta) when X, X' are independent.
        double joint = 0.0;
        for (std::size_t i = 0; i < kDraws; ++i)
            joint += std::cos(dot(a.point(i), xi) + dot(b.point(i), eta));
        joint /= kDraws;
        EXPECT_NEAR(joint, char_fn(rep, xi) * char_fn(rep, eta), kCfBound);
    }
}

TEST(SampleBatchTest, PropagatesWorkerExceptions)
{
    EXPECT_THROW(parallel_chunks(16, 4,
                                 [](std::size_t c) {
                                     if (c == 5)
                                         throw NumericalFailure("boom");
                                 }),
                 NumericalFailure);
}

TEST(ExportTest, CsvHasHeaderAndRows)
{
    const SpectralRep rep(2, StableIndex(1.0), {{1.0, {1.0, 0.0}}, {1.0, {0.0, 1.0}}});
    const auto batch = sample_batch(rep, 5, {111, 0});
    std::ostringstream out;
    write_csv(batch, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x1,x2");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        double a = 0.0;
        double b = 0.0;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf", &a, &b), 2);
        EXPECT_EQ(a, batch.point(rows - 1)[0]);
        EXPECT_EQ(b, batch.point(rows - 1)[1]);
    }
    EXPECT_EQ(rows, 5u);
}

TEST(ExportTest, BinaryRoundTrip)
{
    const SpectralRep rep(3, StableIndex(0.8), {{1.0, {1.0, 0.0, 2.0}}, {1.0, {0.0, 1.0, -1.0}}});
    const auto batch = sample_batch(rep, 1000, {112, 4});
    const auto path = (std::filesystem::temp_directory_path() / "stablecorr_batch.bin").string();
    write_binary(batch, path);
    EXPECT_EQ(std::filesystem::file_size(path), 1000u * 3u * 8u);
    const auto back = read_binary(path);
    EXPECT_EQ(back.data, batch.data);
    EXPECT_EQ(back.n, 3u);
    EXPECT_EQ(back.rep_hash, batch.rep_hash);
    EXPECT_EQ(back.seed, batch.seed);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".json");
}

}  // namespace
}  // namespace stablecorr
