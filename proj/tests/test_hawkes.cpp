#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/stats.hpp"

using namespace hawkes_ruin;

namespace {
const HawkesParams kE1{1.0, 2.0, Exponential{1.0}};
}

TEST(Hawkes, BranchingRatioAndValidation) {
    EXPECT_DOUBLE_EQ(branching_ratio(kE1), 0.5);
    EXPECT_THROW(branching_ratio({0.0, 2.0, Exponential{1.0}}), std::invalid_argument);
    EXPECT_THROW(branching_ratio({1.0, -1.0, Exponential{1.0}}), std::invalid_argument);
    EXPECT_THROW(branching_ratio({1.0, 1.0, Exponential{1.0}}), std::invalid_argument);
    EXPECT_THROW(IntensityStepper(kE1, 0.5), std::invalid_argument);
}

TEST(Hawkes, ExpectedCountClosedForm) {
    EXPECT_NEAR(expected_count(kE1, 1.0, 10.0), 20.0 - (1.0 - std::exp(-10.0)), 1e-12);
    // integral of the mean intensity, by the trapezoid rule
    double integral = 0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        integral += 0.5 * (expected_intensity(kE1, 3.0, 10.0 * i / m) + expected_intensity(kE1, 3.0, 10.0 * (i + 1) / m)) *
                    (10.0 / m);
    }
    EXPECT_NEAR(expected_count(kE1, 3.0, 10.0), integral, 1e-7);
    EXPECT_NEAR(expected_intensity(kE1, 1.0, 1e3), 2.0, 1e-12);
}

TEST(Thinning, MeanCountMatches) {
    const auto est = replicate_mean(20000, {5, 1}, [](Philox4x32& rng, std::size_t) {
        return static_cast<double>(simulate_thinning(kE1, 1.0, 10.0, rng).size());
    });
    EXPECT_LE(z_distance(est, expected_count(kE1, 1.0, 10.0)), 3.0);
}

TEST(Thinning, RecordedIntensityMatchesHistory) {
    Philox4x32 rng(8, 0);
    const double lambda0 = 4.0;
    const auto events = simulate_thinning(kE1, lambda0, 30.0, rng);
    ASSERT_GT(events.size(), 10u);
    for (std::size_t k = 0; k < events.size(); ++k) {
        const double t = events[k].time;
        double lambda = 1.0 + (lambda0 - 1.0) * std::exp(-2.0 * t);
        for (std::size_t i = 0; i < k; ++i) lambda += events[i].mark * std::exp(-2.0 * (t - events[i].time));
        EXPECT_NEAR(events[k].intensity_before, lambda, 1e-9);
        if (k > 0) EXPECT_GT(events[k].time, events[k - 1].time);
    }
}

TEST(Thinning, ZeroShocksArePoisson) {
    const HawkesParams p{1.5, 2.0, Deterministic{0.0}};
    const auto est = replicate_mean(20000, {6, 1}, [&](Philox4x32& rng, std::size_t) {
        return static_cast<double>(simulate_thinning(p, 1.5, 4.0, rng).size());
    });
    EXPECT_LE(z_distance(est, 6.0), 3.0);
}

TEST(Stepper, HigherRateMultiplierScalesEvents) {
    const HawkesParams p{1.0, 2.0, Deterministic{0.0}};
    const auto est = replicate_mean(20000, {7, 1}, [&](Philox4x32& rng, std::size_t) {
        IntensityStepper s(p, 1.0, 2.5);
        double n = 0;
        while (s.advance(rng, 4.0)) ++n;
        return n;
    });
    EXPECT_LE(z_distance(est, 10.0), 3.0);
}

TEST(Cluster, MeanSizeIsOneOverOneMinusMu) {
    const auto est = replicate_mean(100000, {9, 1}, [](Philox4x32& rng, std::size_t) {
        return static_cast<double>(sample_cluster(kE1, rng).claim_count());
    });
    EXPECT_LE(z_distance(est, 2.0), 3.0);
}

TEST(Cluster, StructureInvariants) {
    Philox4x32 rng(10, 0);
    for (int i = 0; i < 2000; ++i) {
        const Cluster c = sample_cluster(kE1, rng);
        ASSERT_EQ(c.offsets.size(), c.kappa);
        ASSERT_EQ(c.marks.size(), c.kappa + 1);
        ASSERT_TRUE(std::is_sorted(c.offsets.begin(), c.offsets.end()));
        if (c.kappa > 0) EXPECT_EQ(c.length(), c.offsets.back());
    }
    const Cluster single = sample_cluster({1.0, 2.0, Deterministic{0.0}}, rng);
    EXPECT_EQ(single.kappa, 0u);
    EXPECT_EQ(single.length(), 0.0);
}

TEST(ClusterProcess, AgreesWithThinningInDistribution) {
    const auto thin = replicate_collect<long>(10000, {11, 1}, [](Philox4x32& rng, std::size_t) {
        return static_cast<long>(simulate_thinning(kE1, 1.0, 10.0, rng).size());
    });
    const auto clus = replicate_collect<long>(10000, {12, 1}, [](Philox4x32& rng, std::size_t) {
        return static_cast<long>(simulate_cluster_process(kE1, 10.0, rng).size());
    });
    EXPECT_GT(two_sample_chi_squared(thin, clus).p_value, 1e-3);
}

TEST(ClusterProcess, IntensitiesFollowFromEvents) {
    Philox4x32 rng(13, 0);
    const auto events = simulate_cluster_process(kE1, 20.0, rng);
    for (std::size_t k = 0; k < events.size(); ++k) {
        double lambda = 1.0;
        for (std::size_t i = 0; i < k; ++i) lambda += events[i].mark * std::exp(-2.0 * (events[k].time - events[i].time));
        EXPECT_NEAR(events[k].intensity_before, lambda, 1e-9);
    }
}
