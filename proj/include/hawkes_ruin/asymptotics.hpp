#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/lundberg.hpp"
#include "hawkes_ruin/measure_change.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/risk.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin {

struct AsymptoticsReport {
    std::vector<double> grid;
    std::vector<EstimateCI> psi_hat;
    std::vector<double> scaled;     ///< psi e^{Ru} or psi / (1 - F^s_U(u))
    std::vector<double> scaled_se;
    std::vector<double> capped_fraction;  ///< importance sampling only
    double target = 0.0;     ///< plateau fit of C^lambda, or rho / (1 - rho)
    double target_se = 0.0;  ///< zero for the closed-form heavy-tail target
    std::string warning;

    /// Largest pairwise |scaled_i - scaled_j| in combined standard errors.
    double max_pairwise_z() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < scaled.size(); ++i) {
            for (std::size_t j = i + 1; j < scaled.size(); ++j) {
                const double se = std::hypot(scaled_se[i], scaled_se[j]);
                worst = std::max(worst, se > 0 ? std::abs(scaled[i] - scaled[j]) / se : 0.0);
            }
        }
        return worst;
    }
    /// Tightest constants with C_- <= scaled(u) <= C_+ over the grid.
    double c_plus() const { return *std::max_element(scaled.begin(), scaled.end()); }
    double c_minus() const { return *std::min_element(scaled.begin(), scaled.end()); }
};

namespace detail {

inline void require_grid(std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("asymptotics: empty capital grid");
    if (!(grid.front() >= 0)) throw std::invalid_argument("asymptotics: capital grid must be >= 0");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("asymptotics: capital grid must be strictly increasing");
    }
}

}  // namespace detail

/// rho = a E[U~] / c with E[U~] = E[U] / (1 - mu). Requires rho < 1.
inline double clustered_load(const RiskModel& model) {
    const double rho =
        model.hawkes().baseline * clustered_claim_mean(model.hawkes(), model.claim()) / model.premium();
    if (!(rho < 1.0)) {
        throw std::invalid_argument("clustered net profit condition rho = a*E[U~]/c < 1 violated (rho = " +
                                    std::to_string(rho) + ")");
    }
    return rho;
}

/// (rho / (1 - rho)) (1 - F^s_U(u)) for claims in S*.
inline double heavy_tail_asymptote(const RiskModel& model, double u) {
    if (!is_strongly_subexponential(model.claim())) {
        throw std::invalid_argument("heavy_tail_asymptote: claim law must be strongly subexponential");
    }
    const double rho = clustered_load(model);
    return rho / (1.0 - rho) * (1.0 - integrated_tail(model.claim(), u));
}

/// Importance-sampling estimates of psi(u) e^{Ru} over the grid; each grid
/// point uses an independent substream. The target is the inverse-variance
/// weighted mean over the upper half of the grid.
inline AsymptoticsReport cramer_curve(const RiskModel& model, const LundbergSolution& sol,
                                      std::span<const double> u_grid, std::size_t n, const RunOptions& opts,
                                      double time_cap = 0.0) {
    detail::require_grid(u_grid);
    AsymptoticsReport rep;
    rep.grid.assign(u_grid.begin(), u_grid.end());
    if (!exp_exp_rates(model)) {
        rep.warning = "the Cramer limit assumes exponentially recurrent intensity returns, "
                      "established only for exponential shocks and claims";
    }
    for (std::size_t k = 0; k < rep.grid.size(); ++k) {
        const double u = rep.grid[k];
        const auto est = is_ruin_estimate(model.with_capital(u), sol, n, substream(opts, k), time_cap);
        const double scale = std::exp(sol.R * u);
        rep.psi_hat.push_back(est.psi);
        rep.scaled.push_back(est.psi.value * scale);
        rep.scaled_se.push_back(est.psi.std_error * scale);
        rep.capped_fraction.push_back(est.capped_fraction);
    }
    double weight_sum = 0.0;
    double weighted = 0.0;
    for (std::size_t k = rep.grid.size() / 2; k < rep.grid.size(); ++k) {
        const double w = rep.scaled_se[k] > 0 ? 1.0 / (rep.scaled_se[k] * rep.scaled_se[k]) : 1.0;
        weight_sum += w;
        weighted += w * rep.scaled[k];
    }
    rep.target = weighted / weight_sum;
    rep.target_se = std::sqrt(1.0 / weight_sum);
    return rep;
}

/// Crude Monte Carlo psi(u) / (1 - F^s_U(u)) over the grid against rho / (1 - rho).
inline AsymptoticsReport heavy_tail_curve(const RiskModel& model, std::span<const double> u_grid, double horizon,
                                          std::size_t n, const RunOptions& opts) {
    detail::require_grid(u_grid);
    const double rho = clustered_load(model);
    if (!is_strongly_subexponential(model.claim())) {
        throw std::invalid_argument("heavy_tail_curve: claim law must be strongly subexponential");
    }
    AsymptoticsReport rep;
    rep.grid.assign(u_grid.begin(), u_grid.end());
    rep.psi_hat = crude_ruin_curve(model, u_grid, horizon, n, opts);
    rep.target = rho / (1.0 - rho);
    for (std::size_t k = 0; k < rep.grid.size(); ++k) {
        const double tail = 1.0 - integrated_tail(model.claim(), rep.grid[k]);
        rep.scaled.push_back(rep.psi_hat[k].value / tail);
        rep.scaled_se.push_back(rep.psi_hat[k].std_error / tail);
        rep.capped_fraction.push_back(0.0);
    }
    return rep;
}

}  // namespace hawkes_ruin
