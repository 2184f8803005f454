#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/errors.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/risk.hpp"

namespace hawkes_ruin {

// The exponential martingale exp(-r X_t - alpha lambda_t - theta t) requires
//   f_r(alpha) = alpha beta + M_U(r) M_Y(-alpha) - 1 = 0,   theta = -c r - alpha beta a.
// f_r is convex in alpha; alpha(r) is its largest root, which exists up to
// r_max where min_alpha f_r = 0. All root finding below is bracketed.

namespace detail {

/// Bisection on a sign change of f over [lo, hi]. Stops when the bracket
/// cannot shrink any further or is narrower than abs_tol.
template <class F>
double bisect(F&& f, double lo, double hi, double abs_tol = 0.0) {
    const bool lo_negative = f(lo) < 0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= abs_tol) break;
        if ((f(mid) < 0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

class TiltingEquation {
public:
    TiltingEquation(const HawkesParams& hawkes, const Distribution& claim, double r)
        : beta_(hawkes.decay), shock_(hawkes.shock), claim_mgf_(mgf(claim, r)) {
        if (!std::isfinite(claim_mgf_)) {
            throw std::domain_error("tilting equation: r = " + std::to_string(r) +
                                    " lies outside the MGF domain of the claim law");
        }
    }

    double value(double alpha) const { return alpha * beta_ + claim_mgf_ * mgf(shock_, -alpha) - 1.0; }
    double slope(double alpha) const { return beta_ - claim_mgf_ * mgf_derivative(shock_, -alpha); }
    /// f_r is finite for alpha > lower_limit().
    double lower_limit() const { return -mgf_boundary(shock_); }

private:
    double beta_;
    const Distribution& shock_;
    double claim_mgf_;
};

struct InnerMinimum {
    double argmin;
    double value;  ///< -inf when f_r is unbounded below
};

/// Minimiser of the convex f_r, located by bisection on its increasing slope.
inline InnerMinimum minimize(const TiltingEquation& eq) {
    double hi = 0.0;
    for (double step = 1.0; eq.slope(hi) <= 0; step *= 2.0) {
        hi = step;
        if (step > 1e12) throw NumericError("tilting equation: slope never becomes positive");
    }
    const double limit = eq.lower_limit();
    double lo = std::min(hi, 0.0) - 1.0;
    if (std::isfinite(limit)) {
        const double width = hi - limit;
        bool found = false;
        for (int k = 1; k <= 200; ++k) {
            lo = limit + width * std::ldexp(1.0, -k);
            if (lo <= limit) break;
            if (eq.slope(lo) < 0) {
                found = true;
                break;
            }
        }
        if (!found) {
            // f_r increases on its whole domain: the infimum sits at the boundary.
            return {limit, eq.value(std::nextafter(limit, kInf))};
        }
    } else {
        for (double step = 1.0; eq.slope(lo) >= 0; step *= 2.0) {
            lo = std::min(hi, 0.0) - step;
            if (step > 1e12) return {-kInf, -kInf};
        }
    }
    const double argmin = bisect([&](double a) { return eq.slope(a); }, lo, hi);
    return {argmin, eq.value(argmin)};
}

// Residual tolerance for treating min f_r as zero at r = r_max.
inline constexpr double kTangencyTolerance = 1e-12;

}  // namespace detail

/// f_r(alpha) for diagnostics and tests.
inline double tilting_residual(const RiskModel& model, double r, double alpha) {
    return detail::TiltingEquation(model.hawkes(), model.claim(), r).value(alpha);
}

/// Largest root alpha(r) of alpha beta + M_U(r) M_Y(-alpha) - 1 = 0.
/// Throws std::domain_error for r > r_max or r outside the claim MGF domain.
inline double alpha_of(const RiskModel& model, double r) {
    // alpha(0) = 0 for every subcritical model.
    if (r == 0.0) return 0.0;
    const detail::TiltingEquation eq(model.hawkes(), model.claim(), r);
    const auto inner = detail::minimize(eq);
    if (inner.value >= 0) {
        if (inner.value <= detail::kTangencyTolerance) return inner.argmin;
        throw std::domain_error("alpha_of: r = " + std::to_string(r) + " exceeds r_max (no real root)");
    }
    double lo = inner.argmin;
    if (!std::isfinite(lo)) {
        lo = -1.0;
        for (double step = 2.0; eq.value(lo) > 0; step *= 2.0) lo = -step;
    }
    double hi = std::max(lo, 0.0) + 1.0;
    for (double step = 2.0; eq.value(hi) <= 0; step *= 2.0) hi = std::max(lo, 0.0) + step;
    return detail::bisect([&](double a) { return eq.value(a); }, lo, hi, 1e-15);
}

/// theta(r) = -c r - alpha(r) beta a.
inline double theta_of(const RiskModel& model, double r) {
    return -model.premium() * r - alpha_of(model, r) * model.hawkes().decay * model.hawkes().baseline;
}

/// alpha'(r) = -M_U'(r) M_Y(-alpha) / (beta - M_U(r) M_Y'(-alpha)), valid for r < r_max.
inline double alpha_derivative(const RiskModel& model, double r) {
    const double alpha = alpha_of(model, r);
    const auto& y = model.hawkes().shock;
    return -mgf_derivative(model.claim(), r) * mgf(y, -alpha) /
           (model.hawkes().decay - mgf(model.claim(), r) * mgf_derivative(y, -alpha));
}

/// Right end of the domain of alpha(.): min_alpha f_{r_max}(alpha) = 0.
/// Returns +inf when min_alpha f_r < 0 for every r below the claim MGF boundary.
inline double r_max_of(const RiskModel& model) {
    auto inner_min = [&](double r) {
        return detail::minimize(detail::TiltingEquation(model.hawkes(), model.claim(), r)).value;
    };
    const double s_u = mgf_boundary(model.claim());
    double hi = kInf;
    if (std::isfinite(s_u)) {
        for (int k = 1; k <= 52; ++k) {
            const double r = s_u * (1.0 - std::ldexp(1.0, -k));
            if (inner_min(r) > 0) {
                hi = r;
                break;
            }
        }
    } else {
        for (double r = 1.0; r < 1e18; r *= 2.0) {
            if (inner_min(r) > 0) {
                hi = r;
                break;
            }
        }
    }
    if (!std::isfinite(hi)) return kInf;
    return detail::bisect(inner_min, 0.0, hi);
}

/// Adjustment coefficient and the tilting functions of a risk model.
struct LundbergSolution {
    RiskModel model;
    double R;
    double r_max;
    double alpha_at_R;

    double alpha(double r) const { return alpha_of(model, r); }
    double theta(double r) const { return theta_of(model, r); }
    double theta_derivative(double r, double h = 1e-6) const { return (theta(r + h) - theta(r - h)) / (2.0 * h); }
};

/// Positive root R of theta. theta is convex with theta(0) = 0 and
/// theta'(0) < 0, so the root in (0, r_max] is unique when it exists.
/// Throws NoPositiveRoot when theta(r_max) < 0.
inline LundbergSolution adjustment_coefficient(const RiskModel& model) {
    const double r_max = r_max_of(model);
    auto theta = [&](double r) { return theta_of(model, r); };

    double top = r_max;
    if (std::isfinite(r_max)) {
        const double at_top = theta(r_max);
        if (at_top < 0) throw NoPositiveRoot(r_max, at_top);
    } else {
        const double s_u = mgf_boundary(model.claim());
        bool found = false;
        double last = 0.0;
        for (int k = 1; k <= 52 && !found; ++k) {
            top = std::isfinite(s_u) ? s_u * (1.0 - std::ldexp(1.0, -k)) : std::ldexp(1.0, k - 1);
            last = theta(top);
            found = last >= 0;
        }
        if (!found) throw NoPositiveRoot(top, last);
    }

    double lo = top;
    for (int k = 1; k <= 200; ++k) {
        lo = top * std::ldexp(1.0, -k);
        if (theta(lo) < 0) break;
        if (k == 200) throw NumericError("adjustment_coefficient: theta is nonnegative near 0");
    }
    const double R = theta(top) == 0 ? top : detail::bisect(theta, lo, top);
    return {model, R, r_max, alpha_of(model, R)};
}

/// Closed forms for exponential shocks Y ~ Exp(gamma) and claims U ~ Exp(mu).
struct ExpExpLundberg {
    double a, beta, gamma, mu, c;
    double R;        ///< smaller positive root r_2 of theta
    double r3;       ///< spurious root, always >= mu
    double r_max;    ///< (beta gamma - 1)^2 mu / (beta gamma + 1)^2
    double ceiling;  ///< premium ceiling a (beta gamma + 1)^2 / (2 (beta gamma - 1) mu)
    bool ceiling_ok;

    double alpha(double r) const {
        const double k = beta * gamma - 1.0;
        const double disc = (-4.0 * r * beta * gamma + k * k * (mu - r)) * (mu - r);
        return -k / (2.0 * beta) + std::sqrt(disc) / (2.0 * beta * (mu - r));
    }
    double theta(double r) const { return -c * r - alpha(r) * a * beta; }
};

inline double premium_ceiling_exp(double a, double beta, double gamma, double mu) {
    const double bg = beta * gamma;
    return a * (bg + 1.0) * (bg + 1.0) / (2.0 * (bg - 1.0) * mu);
}

inline ExpExpLundberg closed_form_R_exp(double a, double beta, double gamma, double mu, double c) {
    const double bg = beta * gamma;
    if (!(bg > 1.0)) throw std::invalid_argument("exp/exp model requires beta*gamma > 1");
    if (!(c > a * bg / (mu * (bg - 1.0)))) {
        throw std::invalid_argument("net profit condition c > a*beta*gamma/(mu*(beta*gamma - 1)) violated");
    }
    const double root = std::sqrt(a * (1.0 + bg) * a * (1.0 + bg) - 2.0 * a * c * (bg - 1.0) * mu + c * c * mu * mu);
    const double base = -a + a * bg + c * mu;
    ExpExpLundberg out{a, beta, gamma, mu, c, 0, 0, 0, 0, false};
    out.R = (base - root) / (2.0 * c);
    out.r3 = (base + root) / (2.0 * c);
    out.r_max = (bg - 1.0) * (bg - 1.0) / ((bg + 1.0) * (bg + 1.0)) * mu;
    out.ceiling = premium_ceiling_exp(a, beta, gamma, mu);
    out.ceiling_ok = c < out.ceiling;
    if (!(out.r3 >= mu * (1.0 - 1e-12))) throw NumericError("closed form: third root below mu");
    return out;
}

/// (gamma, mu) when both shocks and claims are exponential.
inline std::optional<std::pair<double, double>> exp_exp_rates(const RiskModel& model) {
    const auto* y = model.hawkes().shock.as<Exponential>();
    const auto* u = model.claim().as<Exponential>();
    if (!y || !u) return std::nullopt;
    return std::pair{y->rate, u->rate};
}

/// Monte Carlo residual a (E[e^{R U~}] - 1) - c R of the Lundberg equation of
/// the clustered compound Poisson process; zero when R is the adjustment
/// coefficient of the Hawkes model.
inline EstimateCI clustered_adjustment_check(const RiskModel& model, double R, std::size_t n, const RunOptions& opts) {
    const double a = model.hawkes().baseline;
    const double c = model.premium();
    return replicate_mean(n, opts, [&](Philox4x32& rng, std::size_t) {
        const double clustered = sample_clustered_claim(model.hawkes(), model.claim(), rng);
        return a * std::expm1(R * clustered) - c * R;
    });
}

}  // namespace hawkes_ruin
