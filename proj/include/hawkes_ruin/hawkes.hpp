#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/errors.hpp"
#include "hawkes_ruin/rng.hpp"

namespace hawkes_ruin {

/// Marked Hawkes process with kernel h(t, y) = y e^{-beta t}:
///   lambda_t = a + (lambda_0 - a) e^{-beta t} + sum_i Y_i e^{-beta (t - T_i)}.
struct HawkesParams {
    double baseline;  ///< a > 0
    double decay;     ///< beta > 0
    Distribution shock;
};

/// Expected number of direct offspring per event, E[Y] / beta.
/// Throws std::invalid_argument unless the process is subcritical.
inline double branching_ratio(const HawkesParams& p) {
    if (!(std::isfinite(p.baseline) && p.baseline > 0)) {
        throw std::invalid_argument("hawkes: baseline intensity a must be > 0");
    }
    if (!(std::isfinite(p.decay) && p.decay > 0)) {
        throw std::invalid_argument("hawkes: decay beta must be > 0");
    }
    const double mu = mean(p.shock) / p.decay;
    if (!(mu < 1.0)) {
        throw std::invalid_argument("hawkes: subcriticality E[Y] < beta violated (branching ratio " +
                                    std::to_string(mu) + ")");
    }
    return mu;
}

struct EventRecord {
    double time;
    double mark;
    double intensity_before;  ///< lambda at time-
};

/// Offspring of a single base event.
struct Cluster {
    std::size_t kappa = 0;        ///< offspring count, base event excluded
    std::vector<double> offsets;  ///< sorted offspring times relative to the base event; size kappa
    std::vector<double> marks;    ///< marks[0] is the base event's shock; size kappa + 1

    std::size_t claim_count() const { return kappa + 1; }
    double length() const { return offsets.empty() ? 0.0 : offsets.back(); }
};

/// Piecewise-deterministic intensity state advanced event by event with
/// Ogata thinning. Between events lambda decays towards a, so the intensity
/// at the current time dominates the rest of the inter-event interval.
///
/// `rate_multiplier` m scales the jump rate to m * lambda_t while lambda keeps
/// its own dynamics; m = 1 is the ordinary Hawkes process, m != 1 is the
/// jump mechanism under an exponentially tilted measure.
class IntensityStepper {
public:
    IntensityStepper(HawkesParams params, double lambda0, double rate_multiplier = 1.0, double t0 = 0.0)
        : params_(std::move(params)), m_(rate_multiplier), t_(t0), lambda_(lambda0) {
        if (!(lambda0 >= params_.baseline)) {
            throw std::invalid_argument("hawkes: initial intensity must be >= baseline a");
        }
        if (!(rate_multiplier > 0)) {
            throw std::invalid_argument("hawkes: rate multiplier must be > 0");
        }
    }

    double time() const { return t_; }
    double intensity() const { return lambda_; }
    std::size_t events() const { return events_; }
    const HawkesParams& params() const { return params_; }

    /// Deterministic decay from the current state, for t >= time().
    double intensity_at(double t) const {
        return params_.baseline + (lambda_ - params_.baseline) * std::exp(-params_.decay * (t - t_));
    }

    /// Moves to the next event if it occurs no later than `until`; otherwise
    /// moves the state to `until` and returns nullopt.
    template <BitGenerator64 G>
    std::optional<EventRecord> advance(G& gen, double until) {
        double bound = m_ * lambda_;
        for (;;) {
            const double candidate = t_ + exponential(gen, bound);
            if (candidate > until) {
                lambda_ = intensity_at(until);
                t_ = until;
                return std::nullopt;
            }
            lambda_ = intensity_at(candidate);
            t_ = candidate;
            if (uniform_open(gen) * bound <= m_ * lambda_) {
                if (++events_ > kEventCap) throw EventCapExceeded(kEventCap);
                const double mark = sample(params_.shock, gen);
                EventRecord rec{t_, mark, lambda_};
                lambda_ += mark;
                return rec;
            }
            bound = m_ * lambda_;
        }
    }

    /// Overwrites the intensity at the current time (used to pin exact level crossings).
    void set_intensity(double lambda) { lambda_ = lambda; }

private:
    HawkesParams params_;
    double m_;
    double t_;
    double lambda_;
    std::size_t events_ = 0;
};

/// Event list on [0, horizon] by thinning, starting from lambda0.
template <BitGenerator64 G>
std::vector<EventRecord> simulate_thinning(const HawkesParams& params, double lambda0, double horizon, G& gen) {
    branching_ratio(params);
    if (horizon < 0) throw std::invalid_argument("simulate_thinning: horizon must be >= 0");
    IntensityStepper stepper(params, lambda0);
    std::vector<EventRecord> events;
    while (auto ev = stepper.advance(gen, horizon)) {
        events.push_back(*ev);
    }
    return events;
}

/// Galton-Watson realisation of one cluster: an event with mark y has
/// Poisson(y / beta) children, each delayed Exp(beta) from its parent.
template <BitGenerator64 G>
Cluster sample_cluster(const HawkesParams& params, G& gen) {
    branching_ratio(params);
    struct Node {
        double offset;
        double mark;
    };
    std::vector<Node> nodes;
    nodes.push_back({0.0, sample(params.shock, gen)});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double expected = nodes[i].mark / params.decay;
        if (expected <= 0.0) continue;
        const long children = std::poisson_distribution<long>(expected)(gen);
        if (nodes.size() + static_cast<std::size_t>(children) > kEventCap) throw EventCapExceeded(kEventCap);
        const double parent_offset = nodes[i].offset;
        for (long k = 0; k < children; ++k) {
            const double offset = parent_offset + exponential(gen, params.decay);
            nodes.push_back({offset, sample(params.shock, gen)});
        }
    }

    Cluster c;
    c.kappa = nodes.size() - 1;
    c.marks.reserve(nodes.size());
    c.marks.push_back(nodes[0].mark);
    std::sort(nodes.begin() + 1, nodes.end(), [](const Node& x, const Node& y) { return x.offset < y.offset; });
    c.offsets.reserve(c.kappa);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        c.offsets.push_back(nodes[i].offset);
        c.marks.push_back(nodes[i].mark);
    }
    return c;
}

namespace detail {

// Fills intensity_before for time-sorted events of a process started at lambda_0 = a.
inline void fill_intensities(const HawkesParams& params, std::vector<EventRecord>& events) {
    double t_prev = 0.0;
    double after_prev = params.baseline;
    for (auto& ev : events) {
        ev.intensity_before =
            params.baseline + (after_prev - params.baseline) * std::exp(-params.decay * (ev.time - t_prev));
        after_prev = ev.intensity_before + ev.mark;
        t_prev = ev.time;
    }
}

}  // namespace detail

/// Event list on [0, horizon] from the Poisson cluster representation:
/// Poisson(a) base events, each dressed with an independent cluster.
/// Only defined for lambda_0 = a (no pre-history).
template <BitGenerator64 G>
std::vector<EventRecord> simulate_cluster_process(const HawkesParams& params, double horizon, G& gen) {
    branching_ratio(params);
    if (horizon < 0) throw std::invalid_argument("simulate_cluster_process: horizon must be >= 0");
    std::vector<EventRecord> events;
    double t = 0.0;
    for (;;) {
        t += exponential(gen, params.baseline);
        if (t > horizon) break;
        const Cluster c = sample_cluster(params, gen);
        events.push_back({t, c.marks[0], 0.0});
        for (std::size_t j = 0; j < c.kappa; ++j) {
            const double at = t + c.offsets[j];
            if (at > horizon) break;
            events.push_back({at, c.marks[j + 1], 0.0});
        }
        if (events.size() > kEventCap) throw EventCapExceeded(kEventCap);
    }
    std::sort(events.begin(), events.end(), [](const EventRecord& x, const EventRecord& y) { return x.time < y.time; });
    detail::fill_intensities(params, events);
    return events;
}

/// E[lambda_t] = L + (lambda_0 - L) e^{-(beta - E[Y]) t}, L = beta a / (beta - E[Y]).
inline double expected_intensity(const HawkesParams& params, double lambda0, double t) {
    branching_ratio(params);
    const double kappa = params.decay - mean(params.shock);
    const double limit = params.decay * params.baseline / kappa;
    return limit + (lambda0 - limit) * std::exp(-kappa * t);
}

/// E[N_t] = int_0^t E[lambda_s] ds.
inline double expected_count(const HawkesParams& params, double lambda0, double t) {
    branching_ratio(params);
    const double kappa = params.decay - mean(params.shock);
    const double limit = params.decay * params.baseline / kappa;
    return limit * t - (lambda0 - limit) * std::expm1(-kappa * t) / kappa;
}

}  // namespace hawkes_ruin
