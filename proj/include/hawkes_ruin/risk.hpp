#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin {

/// Long-run drift lim E[X_t]/t = c - a beta E[U] / (beta - E[Y]).
inline double net_profit_margin(const HawkesParams& hawkes, double premium, const Distribution& claim) {
    branching_ratio(hawkes);
    return premium - hawkes.baseline * hawkes.decay * mean(claim) / (hawkes.decay - mean(hawkes.shock));
}

/// Surplus X_t = u + c t - sum_{i <= N_t} U_i driven by a marked Hawkes process.
class RiskModel {
public:
    RiskModel(HawkesParams hawkes, double premium, Distribution claim, double capital, double lambda0)
        : hawkes_(std::move(hawkes)), premium_(premium), claim_(std::move(claim)), capital_(capital), lambda0_(lambda0) {
        branching_ratio(hawkes_);
        if (!(std::isfinite(premium_) && premium_ > 0)) {
            throw std::invalid_argument("risk model: premium rate c must be > 0");
        }
        if (!(std::isfinite(capital_) && capital_ >= 0)) {
            throw std::invalid_argument("risk model: initial capital u must be >= 0");
        }
        if (!(std::isfinite(lambda0_) && lambda0_ >= hawkes_.baseline)) {
            throw std::invalid_argument("risk model: initial intensity must be >= baseline a");
        }
        const double margin = net_profit_margin(hawkes_, premium_, claim_);
        if (!(margin > 0)) {
            throw std::invalid_argument("net profit condition c > a*beta*E[U]/(beta - E[Y]) violated (margin " +
                                        std::to_string(margin) + ")");
        }
    }

    const HawkesParams& hawkes() const { return hawkes_; }
    double premium() const { return premium_; }
    const Distribution& claim() const { return claim_; }
    double capital() const { return capital_; }
    double initial_intensity() const { return lambda0_; }

    RiskModel with_capital(double u) const { return {hawkes_, premium_, claim_, u, lambda0_}; }
    RiskModel with_initial_intensity(double lambda0) const { return {hawkes_, premium_, claim_, capital_, lambda0}; }

private:
    HawkesParams hawkes_;
    double premium_;
    Distribution claim_;
    double capital_;
    double lambda0_;
};

inline double net_profit_margin(const RiskModel& model) {
    return net_profit_margin(model.hawkes(), model.premium(), model.claim());
}

struct RuinOutcome {
    bool ruined = false;
    double tau = kInf;                                         ///< ruin time, inf if not ruined
    double deficit = 0.0;                                      ///< -X_tau when ruined
    double lambda_at_tau = std::numeric_limits<double>::quiet_NaN();  ///< post-jump intensity at tau
    std::size_t events_used = 0;
    double surplus_end = 0.0;    ///< X at min(tau, horizon)
    double intensity_end = 0.0;  ///< lambda at min(tau, horizon)
};

/// One surplus path on [0, horizon], stopped at ruin. X only increases
/// between claims, so checking X < 0 at claim instants is exact.
template <BitGenerator64 G>
RuinOutcome simulate_surplus(const RiskModel& model, double horizon, G& gen) {
    if (horizon < 0) throw std::invalid_argument("simulate_surplus: horizon must be >= 0");
    IntensityStepper stepper(model.hawkes(), model.initial_intensity());
    const double u = model.capital();
    const double c = model.premium();
    double claims = 0.0;
    RuinOutcome out;
    while (auto ev = stepper.advance(gen, horizon)) {
        claims += sample(model.claim(), gen);
        const double x = u + c * ev->time - claims;
        if (x < 0) {
            out.ruined = true;
            out.tau = ev->time;
            out.deficit = -x;
            out.lambda_at_tau = stepper.intensity();
            out.events_used = stepper.events();
            out.surplus_end = x;
            out.intensity_end = stepper.intensity();
            return out;
        }
    }
    out.events_used = stepper.events();
    out.surplus_end = u + c * horizon - claims;
    out.intensity_end = stepper.intensity();
    return out;
}

/// Finite-horizon crude Monte Carlo estimate of psi(u, lambda_0). Biased low;
/// the bias vanishes as the horizon grows.
inline EstimateCI crude_ruin_mc(const RiskModel& model, double horizon, std::size_t n, const RunOptions& opts) {
    if (n < 1) throw std::invalid_argument("crude_ruin_mc: n must be >= 1");
    return replicate_mean(n, opts, [&](Philox4x32& rng, std::size_t) {
        return simulate_surplus(model, horizon, rng).ruined ? 1.0 : 0.0;
    });
}

/// min over claim instants t <= horizon of (c t - S_t); +inf without claims.
/// Ruin with capital u occurs iff u + minimum < 0.
template <BitGenerator64 G>
double surplus_running_minimum(const RiskModel& model, double horizon, G& gen) {
    IntensityStepper stepper(model.hawkes(), model.initial_intensity());
    double claims = 0.0;
    double lowest = kInf;
    while (auto ev = stepper.advance(gen, horizon)) {
        claims += sample(model.claim(), gen);
        lowest = std::min(lowest, model.premium() * ev->time - claims);
    }
    return lowest;
}

namespace detail {

// Ruin indicators 1{u + m < 0} for every u of a capital grid.
struct RuinCurveAccumulator {
    std::vector<double> grid;
    std::vector<MeanAccumulator> acc;

    explicit RuinCurveAccumulator(std::vector<double> g = {}) : grid(std::move(g)), acc(grid.size()) {}

    void add(double minimum) {
        for (std::size_t k = 0; k < grid.size(); ++k) acc[k].add(grid[k] + minimum < 0 ? 1.0 : 0.0);
    }
    void merge(const RuinCurveAccumulator& other) {
        for (std::size_t k = 0; k < grid.size(); ++k) acc[k].merge(other.acc[k]);
    }
    std::vector<EstimateCI> estimates() const {
        std::vector<EstimateCI> out;
        for (const auto& a : acc) out.push_back(a.estimate());
        return out;
    }
};

}  // namespace detail

/// crude_ruin_mc for a whole capital grid from the same paths. The model's
/// own capital is ignored.
inline std::vector<EstimateCI> crude_ruin_curve(const RiskModel& model, std::span<const double> u_grid, double horizon,
                                                std::size_t n, const RunOptions& opts) {
    if (n < 1) throw std::invalid_argument("crude_ruin_curve: n must be >= 1");
    detail::RuinCurveAccumulator proto({u_grid.begin(), u_grid.end()});
    return replicate(
               n, opts, [&](Philox4x32& rng, std::size_t) { return surplus_running_minimum(model, horizon, rng); },
               proto)
        .estimates();
}

/// U~ = sum_{j=0}^{kappa} U_j: total claim amount of one cluster.
template <BitGenerator64 G>
double sample_clustered_claim(const HawkesParams& params, const Distribution& claim, G& gen) {
    const Cluster cluster = sample_cluster(params, gen);
    double total = 0.0;
    for (std::size_t j = 0; j < cluster.claim_count(); ++j) total += sample(claim, gen);
    return total;
}

/// E[U~] = E[U] / (1 - mu) by Wald's identity.
inline double clustered_claim_mean(const HawkesParams& params, const Distribution& claim) {
    return mean(claim) / (1.0 - branching_ratio(params));
}

inline void require_clustered_net_profit(const RiskModel& model) {
    const double load = model.hawkes().baseline * clustered_claim_mean(model.hawkes(), model.claim());
    if (!(model.premium() > load)) {
        throw std::invalid_argument("clustered net profit condition c > a*E[U~] violated (a*E[U~] = " +
                                    std::to_string(load) + ")");
    }
}

/// Crude Monte Carlo ruin probability of the compound Poisson process
/// X~_t = u + c t - sum_{i <= Nbar_t} U~_i, Nbar ~ Poisson(a).
inline EstimateCI clustered_ruin_mc(const RiskModel& model, double horizon, std::size_t n, const RunOptions& opts) {
    if (n < 1) throw std::invalid_argument("clustered_ruin_mc: n must be >= 1");
    require_clustered_net_profit(model);
    const double a = model.hawkes().baseline;
    return replicate_mean(n, opts, [&](Philox4x32& rng, std::size_t) {
        double t = 0.0;
        double claims = 0.0;
        for (;;) {
            t += exponential(rng, a);
            if (t > horizon) return 0.0;
            claims += sample_clustered_claim(model.hawkes(), model.claim(), rng);
            if (model.capital() + model.premium() * t - claims < 0) return 1.0;
        }
    });
}

/// Runs one coupled realisation of the cluster representation on [0, horizon]
/// and returns min over claim instants t of X_t - X~_t (+inf without claims).
/// The clustered process books every claim of a cluster at its base time.
template <BitGenerator64 G>
double coupled_domination_gap(const RiskModel& model, double horizon, G& gen) {
    if (model.initial_intensity() != model.hawkes().baseline) {
        throw std::invalid_argument("coupled_domination_gap: cluster representation needs lambda_0 = a");
    }
    struct Booking {
        double time;
        std::size_t cluster;
        double claim;        // claim of X at `time`, unused for cluster bookings
        bool claim_instant;  // false: X~ books the whole cluster total here
    };
    std::vector<Booking> bookings;
    std::vector<double> totals;
    double t = 0.0;
    for (;;) {
        t += exponential(gen, model.hawkes().baseline);
        if (t > horizon) break;
        const Cluster cluster = sample_cluster(model.hawkes(), gen);
        const std::size_t k = totals.size();
        double total = 0.0;
        for (std::size_t j = 0; j < cluster.claim_count(); ++j) {
            const double claim = sample(model.claim(), gen);
            total += claim;
            const double at = t + (j == 0 ? 0.0 : cluster.offsets[j - 1]);
            if (at <= horizon) bookings.push_back({at, k, claim, true});
        }
        totals.push_back(total);
        bookings.push_back({t, k, 0.0, false});
    }
    // Clustered bookings at a base time sort before the base claim itself.
    std::stable_sort(bookings.begin(), bookings.end(), [](const Booking& x, const Booking& y) {
        return x.time < y.time || (x.time == y.time && !x.claim_instant && y.claim_instant);
    });
    // Per cluster: booked by X~ minus booked by X so far. Partial sums follow
    // the order of `total`, so each residual is non-negative in floating point.
    std::vector<double> partial(totals.size(), 0.0), residual(totals.size(), 0.0);
    double gap = kInf;
    for (const auto& b : bookings) {
        if (!b.claim_instant) {
            residual[b.cluster] = totals[b.cluster];
            continue;
        }
        partial[b.cluster] += b.claim;
        residual[b.cluster] = totals[b.cluster] - partial[b.cluster];
        gap = std::min(gap, std::accumulate(residual.begin(), residual.end(), 0.0));
    }
    return gap;
}

/// Empirical p-quantile of the cluster length L from n sampled clusters.
inline double cluster_length_quantile(const HawkesParams& params, double p, std::size_t n, const RunOptions& opts) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("cluster_length_quantile: p must lie in (0, 1)");
    auto lengths = replicate_collect<double>(
        n, opts, [&](Philox4x32& rng, std::size_t) { return sample_cluster(params, rng).length(); });
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(lengths.size()))) - 1;
    std::nth_element(lengths.begin(), lengths.begin() + static_cast<std::ptrdiff_t>(k), lengths.end());
    return lengths[k];
}

inline void write_outcomes_csv(std::ostream& os, std::span<const RuinOutcome> outcomes) {
    os << "ruined,tau,deficit,lambda_at_tau\n";
    for (const auto& o : outcomes) {
        os << (o.ruined ? 1 : 0) << ',' << o.tau << ',' << o.deficit << ',' << o.lambda_at_tau << '\n';
    }
}

}  // namespace hawkes_ruin
