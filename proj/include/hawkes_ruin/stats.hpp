#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace hawkes_ruin {

/// Monte Carlo estimate with its standard error.
struct EstimateCI {
    double value = 0.0;
    double std_error = 0.0;  ///< sample sd / sqrt(n)
    std::size_t n = 0;
    double level = 0.99;

    double z() const {
        return boost::math::quantile(boost::math::normal_distribution<>{}, 0.5 + 0.5 * level);
    }
    double lower() const { return value - z() * std_error; }
    double upper() const { return value + z() * std_error; }

    bool overlaps(const EstimateCI& other) const {
        return lower() <= other.upper() && other.lower() <= upper();
    }
};

/// Running sums for mean / variance. Merging is exact in the sense that the
/// result depends only on the order of merges, which callers fix.
class MeanAccumulator {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const MeanAccumulator& other) {
        if (other.n_ == 0) {
            return;
        }
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double total = static_cast<double>(n_ + other.n_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * static_cast<double>(other.n_) / total;
        m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
        n_ += other.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

    EstimateCI estimate(double level = 0.99) const {
        const double se = n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
        return {mean_, se, n_, level};
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// |a - b| in units of the combined standard error.
inline double z_distance(const EstimateCI& a, const EstimateCI& b) {
    const double se = std::hypot(a.std_error, b.std_error);
    if (se == 0.0) {
        return a.value == b.value ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::abs(a.value - b.value) / se;
}

/// |est - target| in units of est.std_error.
inline double z_distance(const EstimateCI& est, double target) {
    return z_distance(est, EstimateCI{target, 0.0, 0, est.level});
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
/// Sorts `sample` in place.
inline double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) {
        throw std::invalid_argument("ks_statistic: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct ChiSquaredResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Two-sample chi-squared homogeneity test on integer-valued data.
/// Adjacent values are pooled into bins holding at least `min_pooled`
/// combined observations.
inline ChiSquaredResult two_sample_chi_squared(std::span<const long> a, std::span<const long> b,
                                               std::size_t min_pooled = 20) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("two_sample_chi_squared: empty sample");
    }
    std::map<long, std::pair<double, double>> counts;
    for (long v : a) counts[v].first += 1.0;
    for (long v : b) counts[v].second += 1.0;

    std::vector<std::pair<double, double>> bins;
    std::pair<double, double> current{0.0, 0.0};
    for (const auto& [value, c] : counts) {
        current.first += c.first;
        current.second += c.second;
        if (current.first + current.second >= static_cast<double>(min_pooled)) {
            bins.push_back(current);
            current = {0.0, 0.0};
        }
    }
    if (current.first + current.second > 0.0) {
        if (bins.empty()) {
            bins.push_back(current);
        } else {
            bins.back().first += current.first;
            bins.back().second += current.second;
        }
    }

    ChiSquaredResult out;
    out.dof = static_cast<int>(bins.size()) - 1;
    if (out.dof < 1) {
        return out;
    }
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double total = na + nb;
    for (const auto& [ca, cb] : bins) {
        const double pooled = ca + cb;
        const double ea = pooled * na / total;
        const double eb = pooled * nb / total;
        out.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(out.dof),
                                                           out.statistic));
    return out;
}

}  // namespace hawkes_ruin
