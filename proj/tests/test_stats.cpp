#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/stats.hpp"

using namespace hawkes_ruin;

TEST(MeanAccumulator, MatchesTwoPassFormulas) {
    const std::vector<double> xs{1.5, -2.0, 3.25, 0.0, 8.0, 2.5, -1.0};
    MeanAccumulator acc;
    for (double x : xs) acc.add(x);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(acc.mean(), mean, 1e-14);
    EXPECT_NEAR(acc.variance(), ss / (xs.size() - 1), 1e-13);
    EXPECT_NEAR(acc.estimate().std_error, std::sqrt(ss / (xs.size() - 1) / xs.size()), 1e-13);
}

TEST(MeanAccumulator, MergeEqualsSequential) {
    MeanAccumulator all, left, right;
    for (int i = 0; i < 100; ++i) {
        const double x = std::sin(i) * 10;
        all.add(x);
        (i < 37 ? left : right).add(x);
    }
    left.merge(right);
    EXPECT_EQ(left.count(), all.count());
    EXPECT_NEAR(left.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
    MeanAccumulator empty;
    empty.merge(all);
    EXPECT_EQ(empty.count(), all.count());
}

TEST(EstimateCI, NinetyNinePercentQuantileAndOverlap) {
    EstimateCI a{1.0, 0.1, 100};
    EXPECT_NEAR(a.z(), 2.5758293035489, 1e-9);
    EstimateCI b{1.5, 0.1, 100};
    EXPECT_TRUE(a.overlaps(b));
    EstimateCI c{2.0, 0.1, 100};
    EXPECT_FALSE(a.overlaps(c));
    EXPECT_NEAR(z_distance(a, b), 0.5 / std::hypot(0.1, 0.1), 1e-12);
    EXPECT_NEAR(z_distance(a, 1.3), 3.0, 1e-12);
}

TEST(KolmogorovSmirnov, KnownStatistic) {
    std::vector<double> xs{0.1, 0.4, 0.7};
    const double d = ks_statistic(xs, [](double x) { return x; });
    // ECDF jumps to 1/3, 2/3, 1 at 0.1, 0.4, 0.7: largest gap is 1/3 - 0.1 or 0.7 - 2/3 or 1 - 0.7.
    EXPECT_NEAR(d, 0.3, 1e-12);
    std::vector<double> empty;
    EXPECT_THROW(ks_statistic(empty, [](double x) { return x; }), std::invalid_argument);
}

TEST(ChiSquared, IdenticalSamplesGiveZero) {
    std::vector<long> a;
    for (int i = 0; i < 500; ++i) a.push_back(i % 7);
    const auto r = two_sample_chi_squared(a, a);
    EXPECT_NEAR(r.statistic, 0.0, 1e-12);
    EXPECT_NEAR(r.p_value, 1.0, 1e-12);
    EXPECT_GT(r.dof, 0);
}

TEST(ChiSquared, DetectsShiftedSamples) {
    std::vector<long> a, b;
    for (int i = 0; i < 1000; ++i) {
        a.push_back(i % 10);
        b.push_back(i % 10 + 3);
    }
    EXPECT_LT(two_sample_chi_squared(a, b).p_value, 1e-6);
}

TEST(Replicate, IdenticalForAnyWorkerCount) {
    auto kernel = [](Philox4x32& rng, std::size_t i) { return uniform_open(rng) + static_cast<double>(i % 3); };
    const auto one = replicate_mean(5000, {11, 1}, kernel);
    const auto three = replicate_mean(5000, {11, 3}, kernel);
    EXPECT_EQ(one.value, three.value);
    EXPECT_EQ(one.std_error, three.std_error);
    const auto collected = replicate_collect<double>(3000, {11, 4}, kernel);
    const auto serial = replicate_collect<double>(3000, {11, 1}, kernel);
    EXPECT_EQ(collected, serial);
}

TEST(Replicate, UsesStreamPerReplication) {
    const auto values = replicate_collect<std::uint64_t>(2000, {5, 2}, [](Philox4x32& rng, std::size_t) {
        return rng();
    });
    for (std::size_t i = 0; i < values.size(); i += 173) EXPECT_EQ(values[i], Philox4x32(5, i)());
}

TEST(Replicate, PropagatesExceptions) {
    auto kernel = [](Philox4x32&, std::size_t i) -> double {
        if (i == 2500) throw std::runtime_error("boom");
        return 0.0;
    };
    EXPECT_THROW(replicate_mean(4000, {1, 1}, kernel), std::runtime_error);
    EXPECT_THROW(replicate_mean(4000, {1, 3}, kernel), std::runtime_error);
}

TEST(Substream, SeedsAreDistinct) {
    const RunOptions base{123, 2};
    EXPECT_NE(substream(base, 0).seed, substream(base, 1).seed);
    EXPECT_NE(substream(base, 0).seed, base.seed);
    EXPECT_EQ(substream(base, 5).workers, 2u);
    EXPECT_EQ(substream(base, 5).seed, substream(base, 5).seed);
}
