#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/rng.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin {

/// Law of shift + Gamma(shape, rate).
struct StationarySpec {
    double shift;
    double shape;
    double rate;

    double mean() const { return shift + shape / rate; }
    double variance() const { return shape / (rate * rate); }
    double cdf(double x) const { return x <= shift ? 0.0 : boost::math::gamma_p(shape, rate * (x - shift)); }
    double pdf(double x) const {
        if (x <= shift) return 0.0;
        return rate * boost::math::gamma_p_derivative(shape, rate * (x - shift));
    }
};

/// Stationary law of lambda for Y ~ Exp(gamma): a + Gamma(a / beta, (beta gamma - 1) / beta).
inline StationarySpec stationary_exp_shocks(double a, double beta, double gamma) {
    if (!(a > 0 && beta > 0 && gamma > 0)) {
        throw std::invalid_argument("stationary_exp_shocks: a, beta, gamma must be > 0");
    }
    if (!(beta * gamma > 1.0)) {
        throw std::invalid_argument("stationary_exp_shocks: requires beta*gamma > 1 (subcriticality)");
    }
    return {a, a / beta, (beta * gamma - 1.0) / beta};
}

/// Correlation of lambda at lag t under stationarity: e^{-(beta - E[Y]) t}.
inline double stationary_autocorrelation(const HawkesParams& params, double lag) {
    branching_ratio(params);
    return std::exp(-(params.decay - mean(params.shock)) * lag);
}

struct StationaryCheck {
    double ks = 0.0;
    double mean = 0.0;
    double var = 0.0;
    double mean_se = 0.0;  ///< iid standard error of the sample mean
    double var_se = 0.0;   ///< iid standard error of the sample variance
    double target_mean = 0.0;
    double target_var = 0.0;
    std::size_t n = 0;
};

/// Samples lambda at burn_in + k * thin, k = 0..n-1, along one path started
/// at lambda0, and compares the sample with the stationary law. Supports
/// exponential shocks (shifted gamma target) and Y = 0 (point mass at a).
inline StationaryCheck ks_stationary_check(const HawkesParams& params, double lambda0, double burn_in, std::size_t n,
                                           double thin, const RunOptions& opts) {
    branching_ratio(params);
    if (n < 1) throw std::invalid_argument("ks_stationary_check: n must be >= 1");
    if (!(burn_in >= 0 && thin > 0)) throw std::invalid_argument("ks_stationary_check: need burn_in >= 0, thin > 0");
    const auto* expo = params.shock.as<Exponential>();
    const auto* det = params.shock.as<Deterministic>();
    const bool point_mass = det && det->value == 0.0;
    if (!expo && !point_mass) {
        throw std::invalid_argument("ks_stationary_check: closed-form stationary law needs exponential shocks");
    }

    Philox4x32 rng(opts.seed, 0);
    IntensityStepper stepper(params, lambda0);
    std::vector<double> sample;
    sample.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double at = burn_in + static_cast<double>(k) * thin;
        while (stepper.advance(rng, at)) {
        }
        sample.push_back(stepper.intensity());
    }

    StationaryCheck out;
    out.n = n;
    MeanAccumulator first;
    for (double x : sample) first.add(x);
    out.mean = first.mean();
    out.var = first.variance();
    out.mean_se = std::sqrt(out.var / static_cast<double>(n));
    double m4 = 0.0;
    for (double x : sample) m4 += std::pow(x - out.mean, 4);
    m4 /= static_cast<double>(n);
    out.var_se = std::sqrt(std::max(0.0, m4 - out.var * out.var) / static_cast<double>(n));

    if (point_mass) {
        out.target_mean = params.baseline;
        out.target_var = 0.0;
        const auto off = std::count_if(sample.begin(), sample.end(), [&](double x) { return x != params.baseline; });
        out.ks = static_cast<double>(off) / static_cast<double>(n);
    } else {
        const StationarySpec spec = stationary_exp_shocks(params.baseline, params.decay, expo->rate);
        out.target_mean = spec.mean();
        out.target_var = spec.variance();
        out.ks = ks_statistic(sample, [&](double x) { return spec.cdf(x); });
    }
    return out;
}

struct RecurrenceTimes {
    std::vector<double> durations;  ///< successive return times S_1 to the level
    double max_level_error = 0.0;   ///< largest |lambda - level| at a detected crossing
};

/// Starting from lambda = level, records n successive continuous
/// downcrossings of `level`. Between jumps lambda decays deterministically,
/// so each crossing time is t + log((lambda - a) / (level - a)) / beta.
inline RecurrenceTimes sample_recurrence_times(const HawkesParams& params, double level, std::size_t n,
                                               const RunOptions& opts) {
    branching_ratio(params);
    if (!(level > params.baseline)) throw std::invalid_argument("sample_recurrence_times: level must exceed a");
    if (const auto* det = params.shock.as<Deterministic>(); det && det->value == 0.0) {
        throw std::invalid_argument("sample_recurrence_times: with Y = 0 the intensity never returns to the level");
    }
    if (n < 1) throw std::invalid_argument("sample_recurrence_times: n must be >= 1");

    const double a = params.baseline;
    Philox4x32 rng(opts.seed, 0);
    IntensityStepper stepper(params, level);
    RecurrenceTimes out;
    out.durations.reserve(n);
    double last = 0.0;
    while (out.durations.size() < n) {
        stepper.advance(rng, kInf);
        while (stepper.intensity() > level) {
            const double crossing =
                stepper.time() + std::log((stepper.intensity() - a) / (level - a)) / params.decay;
            if (!stepper.advance(rng, crossing)) {
                out.max_level_error = std::max(out.max_level_error, std::abs(stepper.intensity() - level));
                stepper.set_intensity(level);
                out.durations.push_back(crossing - last);
                last = crossing;
                break;
            }
        }
    }
    return out;
}

/// Long-run rate of continuous downcrossings of `level`: beta (level - a) p(level).
inline double downcrossing_rate(const StationarySpec& spec, double beta, double level) {
    return beta * (level - spec.shift) * spec.pdf(level);
}

/// 1 / mean(S_1) with a delta-method standard error; return cycles are iid.
inline EstimateCI empirical_crossing_rate(const std::vector<double>& durations, double level = 0.99) {
    MeanAccumulator acc;
    for (double s : durations) acc.add(s);
    const EstimateCI m = acc.estimate(level);
    return {1.0 / m.value, m.std_error / (m.value * m.value), m.n, level};
}

/// Heuristic light-tail diagnostic: sample mean of e^{q S_1}.
inline EstimateCI empirical_mgf(const std::vector<double>& durations, double q, double level = 0.99) {
    MeanAccumulator acc;
    for (double s : durations) acc.add(std::exp(q * s));
    return acc.estimate(level);
}

}  // namespace hawkes_ruin
