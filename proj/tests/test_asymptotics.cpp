#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hawkes_ruin/asymptotics.hpp"

using namespace hawkes_ruin;

namespace {

RiskModel hawkes_pareto() { return {{1.0, 2.0, Exponential{1.0}}, 3.0, Pareto{2.0, 1.0}, 0.0, 1.0}; }

RiskModel e1() { return {{1.0, 2.0, Exponential{1.0}}, 3.0, Exponential{1.0}, 0.0, 1.0}; }

// Pollaczek-Khinchine: for Y = 0, psi(u) = P(I_1 + ... + I_N > u) with
// P(N = n) = (1 - rho) rho^n and I_i ~ integrated tail law. For Pareto(2, 1)
// claims the integrated tail law is Pareto(1, 1), sampled as 1/V - 1.
EstimateCI pollaczek_khinchine_pareto21(double rho, double u, std::size_t n) {
    MeanAccumulator acc;
    Philox4x32 rng(2024, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        while (uniform_open(rng) < rho) sum += 1.0 / uniform_open(rng) - 1.0;
        acc.add(sum > u ? 1.0 : 0.0);
    }
    return acc.estimate();
}

}  // namespace

TEST(HeavyTail, AsymptoteFormula) {
    // rho = a E[U] / ((1 - mu) c) = 2/3, prefactor 2, 1 - F^s(1) = 1/2
    EXPECT_NEAR(clustered_load(hawkes_pareto()), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(heavy_tail_asymptote(hawkes_pareto(), 1.0), 1.0, 1e-12);
    EXPECT_NEAR(heavy_tail_asymptote(hawkes_pareto(), 0.0), 2.0, 1e-12);
}

TEST(HeavyTail, RejectsLightTailsAndOverload) {
    EXPECT_THROW(heavy_tail_asymptote(e1(), 1.0), std::invalid_argument);
    // rho >= 1 coincides with a violated net profit condition
    EXPECT_THROW(RiskModel({1.0, 2.0, Exponential{1.0}}, 2.0, Pareto{2.0, 1.0}, 0.0, 1.0), std::invalid_argument);
}

TEST(HeavyTail, DegenerateClustersGiveClassicalFormula) {
    const RiskModel cp({1.0, 2.0, Deterministic{0.0}}, 3.0, Pareto{2.0, 1.0}, 0.0, 1.0);
    const double rho = 1.0 / 3.0;
    for (double u : {1.0, 10.0, 100.0}) {
        EXPECT_NEAR(heavy_tail_asymptote(cp, u), rho / (1 - rho) / (1.0 + u), 1e-12);
    }
}

TEST(HeavyTail, CurveFinitePositiveAndMonotone) {
    const std::vector<double> grid{1.0, 5.0, 20.0};
    const auto rep = heavy_tail_curve(hawkes_pareto(), grid, 200.0, 20000, {3, 1});
    EXPECT_NEAR(rep.target, 2.0, 1e-12);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_TRUE(std::isfinite(rep.scaled[k]));
        EXPECT_GT(rep.scaled[k], 0.0);
        if (k > 0) EXPECT_LT(rep.psi_hat[k].value, rep.psi_hat[k - 1].value);
    }
}

TEST(HeavyTail, CompoundPoissonMatchesPollaczekKhinchine) {
    const RiskModel cp({1.0, 2.0, Deterministic{0.0}}, 3.0, Pareto{2.0, 1.0}, 0.0, 1.0);
    const std::vector<double> grid{2.0, 5.0};
    const auto rep = heavy_tail_curve(cp, grid, 1000.0, 40000, {4, 1});
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto oracle = pollaczek_khinchine_pareto21(1.0 / 3.0, grid[k], 400000);
        EXPECT_LE(z_distance(rep.psi_hat[k], oracle), 3.0) << "u=" << grid[k];
    }
}

TEST(HeavyTail, RequiresSubexponentialClaims) {
    const std::vector<double> grid{1.0};
    EXPECT_THROW(heavy_tail_curve(e1(), grid, 10.0, 10, {}), std::invalid_argument);
}

TEST(Cramer, SandwichAndPlateau) {
    const auto sol = adjustment_coefficient(e1());
    const std::vector<double> grid{0.0, 2.0, 5.0, 10.0};
    const auto rep = cramer_curve(e1(), sol, grid, 20000, {5, 1});
    EXPECT_TRUE(rep.warning.empty());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        // lambda_0 = a: every weight is at most e^{-Ru}
        EXPECT_LE(rep.scaled[k], 1.0);
        EXPECT_GT(rep.scaled[k], 0.0);
        if (k > 0) EXPECT_LT(rep.psi_hat[k].value, rep.psi_hat[k - 1].value);
    }
    EXPECT_GT(rep.target, 0.0);
    EXPECT_LE(rep.target, 1.0);
    EXPECT_LT(rep.c_plus() / rep.c_minus(), 10.0);
    EXPECT_GE(rep.max_pairwise_z(), 0.0);
}

TEST(Cramer, PlateauIsInverseVarianceMeanOfUpperHalf) {
    const auto sol = adjustment_coefficient(e1());
    const std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto rep = cramer_curve(e1(), sol, grid, 5000, {6, 1});
    double wsum = 0, acc = 0;
    for (std::size_t k = 2; k < grid.size(); ++k) {
        const double w = 1.0 / (rep.scaled_se[k] * rep.scaled_se[k]);
        wsum += w;
        acc += w * rep.scaled[k];
    }
    EXPECT_NEAR(rep.target, acc / wsum, 1e-14);
}

TEST(Cramer, WarnsOutsideExponentialFamily) {
    const RiskModel model({1.0, 2.0, Exponential{1.0}}, 3.0, Gamma{2.0, 2.0}, 0.0, 1.0);
    const auto sol = adjustment_coefficient(model);
    const std::vector<double> grid{1.0};
    const auto rep = cramer_curve(model, sol, grid, 1000, {7, 1});
    EXPECT_FALSE(rep.warning.empty());
}

TEST(Cramer, RejectsBadGrid) {
    const auto sol = adjustment_coefficient(e1());
    const std::vector<double> unsorted{2.0, 1.0};
    const std::vector<double> empty;
    EXPECT_THROW(cramer_curve(e1(), sol, unsorted, 10, {}), std::invalid_argument);
    EXPECT_THROW(cramer_curve(e1(), sol, empty, 10, {}), std::invalid_argument);
}
