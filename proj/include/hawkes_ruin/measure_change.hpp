#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/lundberg.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/risk.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin {

/// Dynamics of (X, lambda) under the exponentially tilted measure Q^(r).
/// lambda keeps its floor a and decay beta but jumps by shocks from the
/// tilted law F~_Y; events arrive at rate m * lambda_t with
/// m = M_U(r) M_Y(-alpha(r)), and claims follow F_U tilted by r.
struct TiltedModel {
    HawkesParams state;  ///< (a, beta, F~_Y): the intensity dynamics
    double jump_rate_multiplier;
    Distribution claim;
    double premium;
    double r;
    double alpha_r;
    double theta_r;
    std::optional<double> exp_shock_rate;  ///< gamma^(r) when shocks and claims are exponential

    /// Baseline of the event rate, a * m.
    double baseline() const { return state.baseline * jump_rate_multiplier; }
    /// m E[F~_Y]; the tilted intensity is recurrent iff this is below beta.
    double scaled_shock_mean() const { return jump_rate_multiplier * mean(state.shock); }
};

/// Builds Q^(r) for 0 <= r <= R. Throws std::invalid_argument when the
/// recurrence condition beta > M_U(r) M_Y'(-alpha(r)) fails.
inline TiltedModel tilt_model(const RiskModel& model, const LundbergSolution& sol, double r) {
    if (!(r >= 0.0 && r <= sol.R)) {
        throw std::invalid_argument("tilt_model: r must lie in [0, R]");
    }
    const double alpha = r == sol.R ? sol.alpha_at_R : alpha_of(model, r);
    const auto& y = model.hawkes().shock;
    const double m = mgf(model.claim(), r) * mgf(y, -alpha);
    TiltedModel tm{
        {model.hawkes().baseline, model.hawkes().decay, exp_tilt(y, -alpha)},
        m,
        exp_tilt(model.claim(), r),
        model.premium(),
        r,
        alpha,
        r == sol.R ? 0.0 : theta_of(model, r),
        std::nullopt,
    };
    if (!(model.hawkes().decay > tm.scaled_shock_mean())) {
        throw std::invalid_argument("tilt_model: recurrence condition beta > M_U(r) M_Y'(-alpha(r)) violated");
    }
    if (const auto rates = exp_exp_rates(model)) {
        const auto [gamma, mu] = *rates;
        tm.exp_shock_rate = (gamma + alpha) * (gamma + alpha) * (mu - r) / (gamma * mu);
    }
    return tm;
}

/// lim E^Q[X_t]/t = c - E^Q[U] m beta a / (beta - m E^Q[Y]).
inline double tilted_drift(const TiltedModel& tm) {
    const double beta = tm.state.decay;
    return tm.premium - mean(tm.claim) * tm.jump_rate_multiplier * beta * tm.state.baseline /
                            (beta - tm.scaled_shock_mean());
}

/// E^Q[number of events on [0, t]] from lambda_0: m int_0^t E^Q[lambda_s] ds,
/// where E^Q[lambda] relaxes to beta a / (beta - m E^Q[Y]).
inline double tilted_expected_count(const TiltedModel& tm, double lambda0, double t) {
    const double k = tm.state.decay - tm.scaled_shock_mean();
    const double limit = tm.state.decay * tm.state.baseline / k;
    return tm.jump_rate_multiplier * (limit * t - (lambda0 - limit) * std::expm1(-k * t) / k);
}

/// Sample mean of M_t^(r) = exp(r u + alpha(r) lambda_0) exp(-r X_t - alpha(r) lambda_t - theta(r) t)
/// over n paths of the original model, not stopped at ruin. Requires r < r_max.
inline EstimateCI martingale_unit_mean_check(const RiskModel& model, double r, double t, std::size_t n,
                                             const RunOptions& opts) {
    if (n < 1) throw std::invalid_argument("martingale_unit_mean_check: n must be >= 1");
    if (!(t >= 0)) throw std::invalid_argument("martingale_unit_mean_check: t must be >= 0");
    const double alpha = alpha_of(model, r);
    const double theta = theta_of(model, r);
    return replicate_mean(n, opts, [&](Philox4x32& rng, std::size_t) {
        IntensityStepper stepper(model.hawkes(), model.initial_intensity());
        double claims = 0.0;
        while (stepper.advance(rng, t)) claims += sample(model.claim(), rng);
        const double x_minus_u = model.premium() * t - claims;
        return std::exp(-r * x_minus_u - alpha * (stepper.intensity() - model.initial_intensity()) - theta * t);
    });
}

/// One path under Q^(R), run until ruin or `time_cap`.
struct TiltedPath {
    bool ruined = false;
    double tau = kInf;
    double surplus_at_tau = 0.0;  ///< X_tau < 0
    double lambda_at_tau = 0.0;   ///< post-jump intensity at tau
    double weight = 0.0;          ///< dP/dQ on F_tau; 0 for capped paths
};

template <BitGenerator64 G>
TiltedPath simulate_tilted_path(const TiltedModel& tm, double capital, double lambda0, double time_cap, G& gen) {
    IntensityStepper stepper(tm.state, lambda0, tm.jump_rate_multiplier);
    double claims = 0.0;
    TiltedPath out;
    while (auto ev = stepper.advance(gen, time_cap)) {
        claims += sample(tm.claim, gen);
        const double x = capital + tm.premium * ev->time - claims;
        if (x < 0) {
            out.ruined = true;
            out.tau = ev->time;
            out.surplus_at_tau = x;
            out.lambda_at_tau = stepper.intensity();
            out.weight = std::exp(tm.r * (x - capital) + tm.alpha_r * (out.lambda_at_tau - lambda0) +
                                  tm.theta_r * out.tau);
            return out;
        }
    }
    return out;
}

struct ImportanceSamplingResult {
    EstimateCI psi;
    double capped_fraction = 0.0;
    std::size_t bound_violations = 0;  ///< paths with weight above weight_bound
    double weight_bound = 0.0;         ///< e^{-R u - alpha(R) (lambda_0 - a)}
    double max_weight = 0.0;
    double time_cap = 0.0;
    double R = 0.0;
    double alpha_R = 0.0;

    /// Capped paths bias the estimate downwards; flagged above 1e-3.
    bool capped_flag() const { return capped_fraction > 1e-3; }
};

/// Default time cap max(1e3, 1e3 u / |drift under Q^(R)|).
inline double default_time_cap(const TiltedModel& tm, double capital) {
    return std::max(1e3, 1e3 * capital / std::abs(tilted_drift(tm)));
}

namespace detail {

struct TiltedPathAccumulator {
    MeanAccumulator weights;
    std::size_t capped = 0;
    std::size_t violations = 0;
    double max_weight = 0.0;
    double bound = 0.0;

    void add(const TiltedPath& p) {
        weights.add(p.weight);
        if (!p.ruined) ++capped;
        if (p.weight > bound * (1.0 + 1e-12)) ++violations;
        max_weight = std::max(max_weight, p.weight);
    }
    void merge(const TiltedPathAccumulator& o) {
        weights.merge(o.weights);
        capped += o.capped;
        violations += o.violations;
        max_weight = std::max(max_weight, o.max_weight);
    }
};

}  // namespace detail

/// Unbiased estimate of psi(u, lambda_0) by simulating under Q^(R), where
/// ruin is certain, and weighting each path by exp(R (X_tau - u) + alpha(R) (lambda_tau - lambda_0)).
/// A non-positive `time_cap` selects default_time_cap.
inline ImportanceSamplingResult is_ruin_estimate(const RiskModel& model, const LundbergSolution& sol, std::size_t n,
                                                 const RunOptions& opts, double time_cap = 0.0) {
    if (n < 1) throw std::invalid_argument("is_ruin_estimate: n must be >= 1");
    const TiltedModel tm = tilt_model(model, sol, sol.R);
    const double u = model.capital();
    const double lambda0 = model.initial_intensity();
    const double cap = time_cap > 0 ? time_cap : default_time_cap(tm, u);

    detail::TiltedPathAccumulator proto;
    proto.bound = std::exp(-sol.R * u - sol.alpha_at_R * (lambda0 - model.hawkes().baseline));
    const auto acc = replicate(
        n, opts, [&](Philox4x32& rng, std::size_t) { return simulate_tilted_path(tm, u, lambda0, cap, rng); }, proto);

    ImportanceSamplingResult out;
    out.psi = acc.weights.estimate();
    out.capped_fraction = static_cast<double>(acc.capped) / static_cast<double>(n);
    out.bound_violations = acc.violations;
    out.weight_bound = proto.bound;
    out.max_weight = acc.max_weight;
    out.time_cap = cap;
    out.R = sol.R;
    out.alpha_R = sol.alpha_at_R;
    return out;
}

}  // namespace hawkes_ruin
