#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hawkes_ruin/errors.hpp"
#include "hawkes_ruin/lundberg.hpp"

using namespace hawkes_ruin;

namespace {

const double kSqrt3 = std::numbers::sqrt3;

RiskModel exp_exp(double a, double beta, double gamma, double mu, double c) {
    return {{a, beta, Exponential{gamma}}, c, Exponential{mu}, 0.0, a};
}

RiskModel e1() { return exp_exp(1, 2, 1, 1, 3); }

}  // namespace

TEST(Lundberg, E1NumericMatchesSymbolicValues) {
    const auto start = std::chrono::steady_clock::now();
    const auto sol = adjustment_coefficient(e1());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_NEAR(sol.R, (2 - kSqrt3) / 3, 1e-12);
    EXPECT_NEAR(sol.alpha_at_R, (kSqrt3 - 2) / 2, 1e-12);
    EXPECT_NEAR(sol.r_max, 1.0 / 9.0, 1e-12);
    EXPECT_LT(seconds, 1.0);
}

TEST(Lundberg, ClosedFormRoots) {
    const auto cf = closed_form_R_exp(1, 2, 1, 1, 3);
    EXPECT_NEAR(cf.R, (2 - kSqrt3) / 3, 1e-15);
    EXPECT_NEAR(cf.r3, (2 + kSqrt3) / 3, 1e-14);
    EXPECT_GE(cf.r3, 1.0);
    EXPECT_NEAR(cf.r_max, 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(cf.ceiling, 4.5, 1e-15);
    EXPECT_TRUE(cf.ceiling_ok);
    EXPECT_NEAR(cf.theta(cf.R), 0.0, 1e-13);
    EXPECT_THROW(closed_form_R_exp(1, 1, 1, 1, 3), std::invalid_argument);
    EXPECT_THROW(closed_form_R_exp(1, 2, 1, 1, 2), std::invalid_argument);
}

TEST(Lundberg, AlphaAgreesWithClosedFormOnGrid) {
    const auto model = e1();
    const auto cf = closed_form_R_exp(1, 2, 1, 1, 3);
    for (double r = -0.5; r <= 1.0 / 9.0; r += 0.01) {
        const double alpha = alpha_of(model, r);
        EXPECT_NEAR(alpha, cf.alpha(r), 1e-10) << "r=" << r;
        EXPECT_NEAR(tilting_residual(model, r, alpha), 0.0, 1e-12);
    }
    EXPECT_EQ(alpha_of(model, 0.0), 0.0);
    EXPECT_EQ(theta_of(model, 0.0), 0.0);
}

TEST(Lundberg, OtherExpExpModelsMatchClosedForm) {
    for (const auto& [a, beta, gamma, mu, c] :
         {std::tuple{0.5, 3.0, 0.8, 2.0, 1.5}, std::tuple{2.0, 1.0, 4.0, 1.0, 3.5}, std::tuple{1.0, 5.0, 0.5, 0.5, 6.0}}) {
        const auto cf = closed_form_R_exp(a, beta, gamma, mu, c);
        if (!cf.ceiling_ok) continue;
        const auto sol = adjustment_coefficient(exp_exp(a, beta, gamma, mu, c));
        EXPECT_NEAR(sol.R, cf.R, 1e-10);
        EXPECT_NEAR(sol.r_max, cf.r_max, 1e-9);
        EXPECT_NEAR(sol.alpha_at_R, cf.alpha(cf.R), 1e-9);
    }
}

TEST(Lundberg, BeyondRmaxHasNoAlpha) {
    EXPECT_THROW(alpha_of(e1(), 0.2), std::domain_error);
    EXPECT_THROW(alpha_of(e1(), 1.5), std::domain_error);
}

TEST(Lundberg, ThetaSlopeAtZeroIsMinusMargin) {
    const auto sol = adjustment_coefficient(e1());
    EXPECT_NEAR(sol.theta_derivative(0.0, 1e-5), -net_profit_margin(e1()), 1e-6);
    EXPECT_LT(sol.theta(sol.R / 2), 0.0);
    EXPECT_NEAR(sol.theta(sol.R), 0.0, 1e-13);
}

TEST(Lundberg, AlphaDerivativeImplicitFormula) {
    const auto model = e1();
    for (double r : {-0.3, 0.0, 0.05, 0.1}) {
        const double h = 1e-6;
        const double fd = (alpha_of(model, r + h) - alpha_of(model, r - h)) / (2 * h);
        EXPECT_NEAR(alpha_derivative(model, r), fd, 1e-5) << "r=" << r;
    }
}

TEST(Lundberg, PremiumAboveCeilingHasNoRoot) {
    const auto model = exp_exp(1, 2, 1, 1, 5);
    EXPECT_THROW(adjustment_coefficient(model), NoPositiveRoot);
    try {
        adjustment_coefficient(model);
    } catch (const NoPositiveRoot& e) {
        EXPECT_NEAR(e.r_max(), 1.0 / 9.0, 1e-10);
        EXPECT_LT(e.theta_at_r_max(), 0.0);
    }
    EXPECT_NEAR(premium_ceiling_exp(1, 2, 1, 1), 4.5, 1e-15);
}

TEST(Lundberg, CompoundPoissonReduction) {
    // Y = 0: a (M_U(R) - 1) = c R, so R = mu - a / c for U ~ Exp(mu)
    const RiskModel model({1.0, 2.0, Deterministic{0.0}}, 2.0, Exponential{1.0}, 0.0, 1.0);
    const auto sol = adjustment_coefficient(model);
    EXPECT_TRUE(std::isinf(sol.r_max));
    EXPECT_NEAR(sol.R, 0.5, 1e-10);
    EXPECT_NEAR(sol.alpha_at_R, (1.0 - 2.0) / 2.0, 1e-9);
}

TEST(Lundberg, GammaClaimsSatisfyBothEquations) {
    const RiskModel model({0.8, 1.5, Gamma{2.0, 3.0}}, 2.0, Gamma{2.0, 2.0}, 0.0, 0.8);
    const auto sol = adjustment_coefficient(model);
    EXPECT_GT(sol.R, 0.0);
    EXPECT_LE(sol.R, sol.r_max);
    EXPECT_NEAR(tilting_residual(model, sol.R, sol.alpha_at_R), 0.0, 1e-12);
    EXPECT_NEAR(-2.0 * sol.R - sol.alpha_at_R * 1.5 * 0.8, 0.0, 1e-10);
}

TEST(Lundberg, HeavyTailedClaimsHaveNoPositiveR) {
    const RiskModel model({1.0, 2.0, Exponential{1.0}}, 3.0, Pareto{2.0, 1.0}, 0.0, 1.0);
    EXPECT_THROW(adjustment_coefficient(model), std::exception);
}

TEST(Lundberg, ClusteredProcessSharesTheAdjustmentCoefficient) {
    // generating function of the cluster claim total at R: 1 - alpha(R) beta
    const auto sol = adjustment_coefficient(e1());
    EXPECT_NEAR(1.0 - sol.alpha_at_R * 2.0, 3.0 - kSqrt3, 1e-12);
    EXPECT_NEAR(1.0 * ((3.0 - kSqrt3) - 1.0), 3.0 * sol.R, 1e-12);
    const auto est = clustered_adjustment_check(e1(), sol.R, 200000, {91, 1});
    EXPECT_LE(z_distance(est, 0.0), 3.0);
}
