#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hawkes_ruin/rng.hpp"

namespace hawkes_ruin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Exponential {
    double rate;
};

struct Gamma {
    double shape;
    double rate;
};

/// Lomax form: survival (scale / (scale + x))^shape on [0, inf).
struct Pareto {
    double shape;
    double scale;
};

/// Survival exp(-(x/scale)^shape), shape in (0, 1].
struct Weibull {
    double shape;
    double scale;
};

struct LogNormal {
    double location;
    double scale;
};

struct Deterministic {
    double value;
};

class Distribution;

/// Density proportional to e^{s x} against `base`, s < 0, sampled by
/// acceptance-rejection. Only produced by exp_tilt for families that are not
/// closed under tilting.
struct TiltedLaw {
    std::shared_ptr<const Distribution> base;
    double s;
    double normalizer;  ///< mgf(base, s)
};

/// Parametric law of a nonnegative random variable (claim sizes, shocks).
/// Parameters are validated on construction; instances are immutable.
class Distribution {
public:
    using Law = std::variant<Exponential, Gamma, Pareto, Weibull, LogNormal, Deterministic, TiltedLaw>;

    Distribution(Exponential d) : law_(d) {
        require(std::isfinite(d.rate) && d.rate > 0, "exponential: rate must be > 0");
    }
    Distribution(Gamma d) : law_(d) {
        require(std::isfinite(d.shape) && d.shape > 0, "gamma: shape must be > 0");
        require(std::isfinite(d.rate) && d.rate > 0, "gamma: rate must be > 0");
    }
    Distribution(Pareto d) : law_(d) {
        require(std::isfinite(d.shape) && d.shape > 1, "pareto: shape must be > 1 (finite mean)");
        require(std::isfinite(d.scale) && d.scale > 0, "pareto: scale must be > 0");
    }
    Distribution(Weibull d) : law_(d) {
        require(d.shape > 0 && d.shape <= 1, "weibull: shape must lie in (0, 1]");
        require(std::isfinite(d.scale) && d.scale > 0, "weibull: scale must be > 0");
    }
    Distribution(LogNormal d) : law_(d) {
        require(std::isfinite(d.location), "lognormal: location must be finite");
        require(std::isfinite(d.scale) && d.scale > 0, "lognormal: scale must be > 0");
    }
    Distribution(Deterministic d) : law_(d) {
        require(std::isfinite(d.value) && d.value >= 0, "deterministic: value must be >= 0");
    }
    Distribution(TiltedLaw d) : law_(std::move(d)) {
        const auto& t = std::get<TiltedLaw>(law_);
        require(t.base != nullptr, "tilted: missing base law");
        require(t.s < 0, "tilted: acceptance-rejection tilt requires s < 0");
    }

    const Law& law() const noexcept { return law_; }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&law_);
    }

    std::string_view kind() const {
        return std::visit(
            [](const auto& d) -> std::string_view {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) return "exponential";
                else if constexpr (std::is_same_v<T, Gamma>) return "gamma";
                else if constexpr (std::is_same_v<T, Pareto>) return "pareto";
                else if constexpr (std::is_same_v<T, Weibull>) return "weibull";
                else if constexpr (std::is_same_v<T, LogNormal>) return "lognormal";
                else if constexpr (std::is_same_v<T, Deterministic>) return "deterministic";
                else return "tilted";
            },
            law_);
    }

private:
    static void require(bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    }

    Law law_;
};

namespace detail {

// Weibull with shape 1 is an exponential law and is treated as one throughout.
inline bool weibull_is_exponential(const Weibull& w) { return w.shape == 1.0; }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace detail

inline double mean(const Distribution& d);
inline double cdf(const Distribution& d, double x);
inline double mgf(const Distribution& d, double s);

inline double survival(const Distribution& d, double x) { return 1.0 - cdf(d, x); }

/// Right end s_max of the MGF domain: E[e^{sX}] < inf exactly for s < s_max
/// (s <= s_max for Deterministic, where s_max = +inf).
inline double mgf_boundary(const Distribution& d) {
    return std::visit(
        [](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) return law.rate;
            else if constexpr (std::is_same_v<T, Gamma>) return law.rate;
            else if constexpr (std::is_same_v<T, Weibull>)
                return detail::weibull_is_exponential(law) ? 1.0 / law.scale : 0.0;
            else if constexpr (std::is_same_v<T, Deterministic>) return kInf;
            else if constexpr (std::is_same_v<T, TiltedLaw>) return mgf_boundary(*law.base) - law.s;
            else return 0.0;
        },
        d.law());
}

namespace detail {

// For s < 0: E[e^{sX}] = 1 + s * int_0^inf e^{sx} S(x) dx, and
// E[X e^{sX}] = int_0^inf (1 + s x) e^{sx} S(x) dx. Both integrands are bounded.
inline double mgf_by_quadrature(const Distribution& d, double s) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral = integrator.integrate([&](double x) { return std::exp(s * x) * survival(d, x); });
    return 1.0 + s * integral;
}

inline double mgf_derivative_by_quadrature(const Distribution& d, double s) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double x) { return (1.0 + s * x) * std::exp(s * x) * survival(d, x); });
}

// E[e^{sX}; X <= x] = e^{sx} F(x) - s int_0^x e^{sy} F(y) dy.
inline double partial_mgf(const Distribution& d, double s, double x) {
    if (x <= 0.0) return 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double y) { return std::exp(s * y) * cdf(d, y); }, 0.0, x, 10, 1e-12);
    return std::exp(s * x) * cdf(d, x) - s * integral;
}

}  // namespace detail

/// E[e^{sX}], returning +inf outside the domain.
inline double mgf(const Distribution& d, double s) {
    if (s == 0.0) return 1.0;
    if (s >= mgf_boundary(d)) return kInf;
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return law.rate / (law.rate - s);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return std::pow(law.rate / (law.rate - s), law.shape);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return std::exp(s * law.value);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                if (detail::weibull_is_exponential(law)) return 1.0 / (1.0 - s * law.scale);
                return detail::mgf_by_quadrature(d, s);
            } else if constexpr (std::is_same_v<T, TiltedLaw>) {
                return mgf(*law.base, law.s + s) / law.normalizer;
            } else {
                return detail::mgf_by_quadrature(d, s);
            }
        },
        d.law());
}

/// d/ds E[e^{sX}] = E[X e^{sX}], +inf outside the domain.
inline double mgf_derivative(const Distribution& d, double s) {
    if (s == 0.0) return mean(d);
    if (s >= mgf_boundary(d)) return kInf;
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return law.rate / ((law.rate - s) * (law.rate - s));
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return law.shape / (law.rate - s) * std::pow(law.rate / (law.rate - s), law.shape);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return law.value * std::exp(s * law.value);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                if (detail::weibull_is_exponential(law)) {
                    const double q = 1.0 - s * law.scale;
                    return law.scale / (q * q);
                }
                return s == 0.0 ? mean(d) : detail::mgf_derivative_by_quadrature(d, s);
            } else if constexpr (std::is_same_v<T, TiltedLaw>) {
                return mgf_derivative(*law.base, law.s + s) / law.normalizer;
            } else {
                return s == 0.0 ? mean(d) : detail::mgf_derivative_by_quadrature(d, s);
            }
        },
        d.law());
}

inline double mean(const Distribution& d) {
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) return 1.0 / law.rate;
            else if constexpr (std::is_same_v<T, Gamma>) return law.shape / law.rate;
            else if constexpr (std::is_same_v<T, Pareto>) return law.scale / (law.shape - 1.0);
            else if constexpr (std::is_same_v<T, Weibull>) return law.scale * std::tgamma(1.0 + 1.0 / law.shape);
            else if constexpr (std::is_same_v<T, LogNormal>)
                return std::exp(law.location + 0.5 * law.scale * law.scale);
            else if constexpr (std::is_same_v<T, Deterministic>) return law.value;
            else return mgf_derivative(*law.base, law.s) / law.normalizer;
        },
        d.law());
}

inline double cdf(const Distribution& d, double x) {
    if (x < 0.0) return 0.0;
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-law.rate * x);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return boost::math::gamma_p(law.shape, law.rate * x);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return 1.0 - std::pow(law.scale / (law.scale + x), law.shape);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return -std::expm1(-std::pow(x / law.scale, law.shape));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return x == 0.0 ? 0.0 : detail::normal_cdf((std::log(x) - law.location) / law.scale);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return x >= law.value ? 1.0 : 0.0;
            } else {
                return std::min(1.0, detail::partial_mgf(*law.base, law.s, x) / law.normalizer);
            }
        },
        d.law());
}

/// Stationary-excess law F^s(u) = (1/E[X]) int_0^u (1 - F(y)) dy.
inline double integrated_tail(const Distribution& d, double u) {
    if (!(u >= 0.0)) throw std::invalid_argument("integrated_tail: u must be >= 0");
    if (u == 0.0) return 0.0;
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-law.rate * u);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                const double z = law.rate * u;
                return z / law.shape * boost::math::gamma_q(law.shape, z) + boost::math::gamma_p(law.shape + 1.0, z);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return 1.0 - std::pow(law.scale / (law.scale + u), law.shape - 1.0);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return boost::math::gamma_p(1.0 / law.shape, std::pow(u / law.scale, law.shape));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                const double z = (std::log(u) - law.location) / law.scale;
                return u * detail::normal_cdf(-z) / mean(d) + detail::normal_cdf(z - law.scale);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return law.value == 0.0 ? 1.0 : std::min(u, law.value) / law.value;
            } else {
                const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                    [&](double y) { return survival(d, y); }, 0.0, u, 10, 1e-10);
                return std::min(1.0, integral / mean(d));
            }
        },
        d.law());
}

/// Pareto, log-normal and Weibull with shape < 1 belong to S*.
inline bool is_strongly_subexponential(const Distribution& d) {
    if (d.as<Pareto>() || d.as<LogNormal>()) return true;
    if (const auto* w = d.as<Weibull>()) return w->shape < 1.0;
    return false;
}

/// Law with density proportional to e^{sx} against d. Closed-form for the
/// exponential, gamma and deterministic families; otherwise only s <= 0 is
/// supported, through an acceptance-rejection wrapper.
inline Distribution exp_tilt(const Distribution& d, double s) {
    if (s == 0.0) return d;
    if (!(s < mgf_boundary(d))) {
        throw std::invalid_argument("exp_tilt: s = " + std::to_string(s) + " is outside the MGF domain");
    }
    if (const auto* e = d.as<Exponential>()) return Exponential{e->rate - s};
    if (const auto* g = d.as<Gamma>()) return Gamma{g->shape, g->rate - s};
    if (d.as<Deterministic>()) return d;
    if (const auto* w = d.as<Weibull>(); w && detail::weibull_is_exponential(*w)) {
        return Exponential{1.0 / w->scale - s};
    }
    if (const auto* t = d.as<TiltedLaw>()) {
        const double total = t->s + s;
        if (total == 0.0) return *t->base;
        if (total > 0.0) throw std::invalid_argument("exp_tilt: positive tilt of a heavy-tailed law");
        return TiltedLaw{t->base, total, mgf(*t->base, total)};
    }
    if (s > 0.0) throw std::invalid_argument("exp_tilt: positive tilt outside closed-form families");
    return TiltedLaw{std::make_shared<const Distribution>(d), s, mgf(d, s)};
}

template <BitGenerator64 G>
double sample(const Distribution& d, G& gen) {
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return exponential(gen, law.rate);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return std::gamma_distribution<double>(law.shape, 1.0 / law.rate)(gen);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                return law.scale * std::expm1(-std::log(uniform_open(gen)) / law.shape);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return law.scale * std::pow(-std::log(uniform_open(gen)), 1.0 / law.shape);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(law.location + law.scale * std::normal_distribution<double>()(gen));
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return law.value;
            } else {
                for (;;) {
                    const double x = sample(*law.base, gen);
                    if (uniform_open(gen) < std::exp(law.s * x)) return x;
                }
            }
        },
        d.law());
}

}  // namespace hawkes_ruin
