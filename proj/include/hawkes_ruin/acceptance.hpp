#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hawkes_ruin/asymptotics.hpp"
#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/lundberg.hpp"
#include "hawkes_ruin/measure_change.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/risk.hpp"
#include "hawkes_ruin/stationary.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin::acceptance {

/// a = 1, beta = 2, Y ~ Exp(1), U ~ Exp(1), c = 3.
inline RiskModel e1_model(double u = 0.0, double lambda0 = 1.0) {
    return {{1.0, 2.0, Exponential{1.0}}, 3.0, Exponential{1.0}, u, lambda0};
}

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  ///< stated runtime budget, 0 if none

    std::string line() const {
        char buf[96];
        std::snprintf(buf, sizeof buf, " (%.2f s", seconds);
        std::string out = std::string(pass ? "[PASS] " : "[FAIL] ") + std::to_string(id) + " " + name + ": " + detail +
                          buf;
        if (budget_seconds > 0) {
            std::snprintf(buf, sizeof buf, ", budget %.0f s", budget_seconds);
            out += buf;
        }
        return out + ")";
    }
};

namespace detail {

inline std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

}  // namespace detail

inline CriterionResult lundberg_closed_form(const RunOptions&) {
    const double sqrt3 = std::numbers::sqrt3;
    const double R_expected = (2.0 - sqrt3) / 3.0;
    const double alpha_expected = (sqrt3 - 2.0) / 2.0;
    const double r_max_expected = 1.0 / 9.0;
    const auto sol = adjustment_coefficient(e1_model());
    const double eR = std::abs(sol.R - R_expected);
    const double eA = std::abs(sol.alpha_at_R - alpha_expected);
    const double eM = std::abs(sol.r_max - r_max_expected);
    return {1, "lundberg_closed_form", eR < 1e-9 && eA < 1e-9 && eM < 1e-9,
            detail::fmt("R=%.12f (err %.1e), alpha(R)=%.12f (err %.1e), r_max=%.12f (err %.1e), tol 1e-9", sol.R, eR,
                        sol.alpha_at_R, eA, sol.r_max, eM)};
}

inline CriterionResult martingale_unit_mean(const RunOptions& opts) {
    const auto model = e1_model(2.0);
    const double R = adjustment_coefficient(model).R;
    bool pass = true;
    std::string detail;
    std::uint64_t k = 0;
    for (double r : {R / 2.0, R}) {
        for (double t : {1.0, 5.0}) {
            const auto est = martingale_unit_mean_check(model, r, t, 100'000, substream(opts, k++));
            const double z = z_distance(est, 1.0);
            pass = pass && z <= 3.0;
            detail += detail::fmt("r=%.4f t=%g: %.4f+-%.4f (z %.2f); ", r, t, est.value, est.std_error, z);
        }
    }
    return {2, "martingale_unit_mean", pass, detail + "need z <= 3"};
}

inline CriterionResult estimator_cross_validation(const RunOptions& opts) {
    const auto sol = adjustment_coefficient(e1_model());
    bool pass = true;
    std::string detail;
    std::uint64_t k = 0;
    for (double u : {0.0, 1.0, 2.0}) {
        const auto model = e1_model(u);
        const auto is = is_ruin_estimate(model, sol, 100'000, substream(opts, k++));
        const auto crude = crude_ruin_mc(model, 200.0, 100'000, substream(opts, k++));
        const bool ok = is.psi.overlaps(crude);
        pass = pass && ok;
        detail += detail::fmt("u=%g: IS %.4f [%.4f,%.4f] crude %.4f [%.4f,%.4f]; ", u, is.psi.value, is.psi.lower(),
                              is.psi.upper(), crude.value, crude.lower(), crude.upper());
    }
    return {3, "estimator_cross_validation", pass, detail + "need overlapping 99% CIs"};
}

inline CriterionResult lundberg_bound(const RunOptions& opts) {
    const auto model = e1_model(2.0);
    const auto sol = adjustment_coefficient(model);
    const auto est = is_ruin_estimate(model, sol, 1'000'000, opts);
    return {4, "lundberg_bound", est.bound_violations == 0 && est.capped_fraction == 0.0,
            detail::fmt("1e6 paths at u=2: violations %zu, max weight %.6f <= bound %.6f, capped %.1e",
                        est.bound_violations, est.max_weight, est.weight_bound, est.capped_fraction)};
}

inline CriterionResult cramer_flatness(const RunOptions& opts) {
    const auto model = e1_model();
    const auto sol = adjustment_coefficient(model);
    const std::vector<double> grid{5.0, 10.0, 20.0, 40.0};
    const auto rep = cramer_curve(model, sol, grid, 100'000, opts);
    std::string detail;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        detail += detail::fmt("u=%g: %.4f+-%.4f; ", grid[k], rep.scaled[k], rep.scaled_se[k]);
    }
    const double z = rep.max_pairwise_z();
    const bool pass = z <= 3.0 && rep.target > 0.0 && rep.target <= 1.0;
    return {5, "cramer_flatness", pass,
            detail + detail::fmt("max pairwise z %.2f (need <= 3), C=%.4f (need in (0,1])", z, rep.target)};
}

inline CriterionResult sampler_equivalence(const RunOptions& opts) {
    const HawkesParams p{1.0, 2.0, Exponential{1.0}};
    const double horizon = 10.0;
    const double expected = 19.0;
    const auto thinning = replicate_collect<long>(10'000, substream(opts, 0), [&](Philox4x32& rng, std::size_t) {
        return static_cast<long>(simulate_thinning(p, p.baseline, horizon, rng).size());
    });
    const auto cluster = replicate_collect<long>(10'000, substream(opts, 1), [&](Philox4x32& rng, std::size_t) {
        return static_cast<long>(simulate_cluster_process(p, horizon, rng).size());
    });
    const auto chi = two_sample_chi_squared(thinning, cluster);
    MeanAccumulator a, b;
    for (long v : thinning) a.add(static_cast<double>(v));
    for (long v : cluster) b.add(static_cast<double>(v));
    const double za = z_distance(a.estimate(), expected);
    const double zb = z_distance(b.estimate(), expected);
    return {6, "sampler_equivalence", chi.p_value > 1e-3 && za <= 3.0 && zb <= 3.0,
            detail::fmt("chi2 %.2f on %d dof, p=%.4f (need > 0.001); thinning mean %.3f (z %.2f), "
                        "cluster mean %.3f (z %.2f) vs 19.000",
                        chi.statistic, chi.dof, chi.p_value, a.mean(), za, b.mean(), zb)};
}

inline CriterionResult cluster_moments(const RunOptions& opts) {
    const HawkesParams p{1.0, 2.0, Exponential{1.0}};
    const auto est = replicate_mean(100'000, opts, [&](Philox4x32& rng, std::size_t) {
        return static_cast<double>(sample_cluster(p, rng).claim_count());
    });
    const double z = z_distance(est, 2.0);
    return {7, "cluster_moments", z <= 3.0,
            detail::fmt("E[kappa+1] = %.4f+-%.4f vs 2 (z %.2f, need <= 3)", est.value, est.std_error, z)};
}

inline CriterionResult stationary_law(const RunOptions& opts) {
    const HawkesParams p{1.0, 2.0, Exponential{1.0}};
    const auto check = ks_stationary_check(p, 1.0, 200.0, 10'000, 5.0, opts);
    return {8, "stationary_law", check.ks < 0.05,
            detail::fmt("KS %.4f (need < 0.05), mean %.4f vs %.4f, var %.4f vs %.4f", check.ks, check.mean,
                        check.target_mean, check.var, check.target_var)};
}

inline CriterionResult sandwich_bounds(const RunOptions& opts) {
    const auto base = e1_model();
    const auto sol = adjustment_coefficient(base);
    const double l1 = cluster_length_quantile(base.hawkes(), 0.9, 100'000, substream(opts, 0));
    const double shift = l1 * base.premium();
    const double horizon = 200.0;
    bool pass = true;
    std::string detail = detail::fmt("l1=%.4f (90%% cluster length quantile); ", l1);
    std::uint64_t k = 1;
    for (double u : {1.0, 2.0, 5.0}) {
        const auto upper = clustered_ruin_mc(base.with_capital(u), horizon, 100'000, substream(opts, k++));
        const auto mid = is_ruin_estimate(base.with_capital(u), sol, 100'000, substream(opts, k++)).psi;
        const auto lower = clustered_ruin_mc(base.with_capital(u + shift), horizon, 100'000, substream(opts, k++));
        const double gap_up = (upper.value - mid.value) / std::hypot(upper.std_error, mid.std_error);
        const double gap_down = (mid.value - lower.value) / std::hypot(mid.std_error, lower.std_error);
        pass = pass && gap_up >= -3.0 && gap_down >= -3.0;
        detail += detail::fmt("u=%g: %.4f >= %.4f >= %.4f (z %.1f, %.1f); ", u, upper.value, mid.value, lower.value,
                              gap_up, gap_down);
    }
    return {9, "sandwich_bounds", pass, detail + "need both gaps >= -3 sigma"};
}

inline CriterionResult heavy_tail_ratio(const RunOptions& opts) {
    const RiskModel model({1.0, 2.0, Exponential{1.0}}, 3.0, Pareto{2.0, 1.0}, 0.0, 1.0);
    const std::vector<double> grid{50.0};
    const auto rep = heavy_tail_curve(model, grid, 1e3, 1'000'000, opts);
    const double rel = rep.scaled[0] / rep.target - 1.0;
    return {10, "heavy_tail_ratio", std::abs(rel) <= 0.3,
            detail::fmt("u=50: psi=%.5f+-%.5f, ratio %.4f+-%.4f vs rho/(1-rho)=%.4f (rel %+.1f%%, need within 30%%)",
                        rep.psi_hat[0].value, rep.psi_hat[0].std_error, rep.scaled[0], rep.scaled_se[0], rep.target,
                        100.0 * rel)};
}

inline CriterionResult degenerate_reduction(const RunOptions& opts) {
    const RiskModel model({1.0, 2.0, Deterministic{0.0}}, 2.0, Exponential{1.0}, 1.0, 1.0);
    const double exact = 0.5 * std::exp(-0.5);
    const auto sol = adjustment_coefficient(model);
    const auto is = is_ruin_estimate(model, sol, 100'000, substream(opts, 0)).psi;
    const auto crude = crude_ruin_mc(model, 1e3, 100'000, substream(opts, 1));
    const double zi = z_distance(is, exact);
    const double zc = z_distance(crude, exact);
    return {11, "degenerate_reduction", zi <= 3.0 && zc <= 3.0,
            detail::fmt("exact %.5f; IS %.5f+-%.5f (z %.2f), crude %.5f+-%.5f (z %.2f), need z <= 3", exact, is.value,
                        is.std_error, zi, crude.value, crude.std_error, zc)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<CriterionResult(const RunOptions&)> run;
};

inline std::vector<Criterion> criteria() {
    return {
        {1, "lundberg_closed_form", 1, lundberg_closed_form},
        {2, "martingale_unit_mean", 120, martingale_unit_mean},
        {3, "estimator_cross_validation", 300, estimator_cross_validation},
        {4, "lundberg_bound", 0, lundberg_bound},
        {5, "cramer_flatness", 600, cramer_flatness},
        {6, "sampler_equivalence", 120, sampler_equivalence},
        {7, "cluster_moments", 0, cluster_moments},
        {8, "stationary_law", 0, stationary_law},
        {9, "sandwich_bounds", 0, sandwich_bounds},
        {10, "heavy_tail_ratio", 1200, heavy_tail_ratio},
        {11, "degenerate_reduction", 0, degenerate_reduction},
    };
}

/// Runs every criterion, printing one line per criterion as it completes.
/// A criterion that throws is reported as failed with the exception message.
inline std::vector<CriterionResult> run_acceptance(const RunOptions& opts, std::ostream* log = nullptr) {
    std::vector<CriterionResult> results;
    for (const auto& c : criteria()) {
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = c.run(substream(opts, 1000 + static_cast<std::uint64_t>(c.id)));
        } catch (const std::exception& e) {
            r = {c.id, c.name, false, std::string("error: ") + e.what()};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.budget_seconds = c.budget_seconds;
        if (r.budget_seconds > 0 && r.seconds > r.budget_seconds) {
            r.pass = false;
            r.detail += "; runtime budget exceeded";
        }
        if (log) *log << r.line() << std::endl;
        results.push_back(r);
    }
    return results;
}

}  // namespace hawkes_ruin::acceptance
