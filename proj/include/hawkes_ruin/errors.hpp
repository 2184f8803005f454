#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hawkes_ruin {

// Precondition and model-validation failures are reported as
// std::invalid_argument; everything below is a numeric failure.

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulated path or cluster produced more events than the hard cap.
class EventCapExceeded : public NumericError {
public:
    explicit EventCapExceeded(std::size_t cap)
        : NumericError("event cap of " + std::to_string(cap) + " exceeded"), cap_(cap) {}
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

/// theta(r) < 0 on the whole admissible domain: no positive adjustment coefficient.
class NoPositiveRoot : public NumericError {
public:
    NoPositiveRoot(double r_max, double theta_at_r_max)
        : NumericError("no positive root of theta: theta(r_max=" + std::to_string(r_max) +
                       ") = " + std::to_string(theta_at_r_max) + " < 0"),
          r_max_(r_max),
          theta_at_r_max_(theta_at_r_max) {}

    double r_max() const noexcept { return r_max_; }
    double theta_at_r_max() const noexcept { return theta_at_r_max_; }

private:
    double r_max_;
    double theta_at_r_max_;
};

inline constexpr std::size_t kEventCap = 10'000'000;

}  // namespace hawkes_ruin
