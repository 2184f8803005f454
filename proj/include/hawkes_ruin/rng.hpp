#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>

namespace hawkes_ruin {

/// Uniform bit generator producing full 64-bit words. All samplers in this
/// library draw uniforms from the top 53 bits, so narrower engines are rejected
/// at compile time.
template <class G>
concept BitGenerator64 = std::uniform_random_bit_generator<G> &&
    std::same_as<typename G::result_type, std::uint64_t> &&
    (G::min() == 0) && (G::max() == std::numeric_limits<std::uint64_t>::max());

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream index); the 128-bit counter is
/// (block, stream). Two streams with different indices never overlap, so
/// replication i of a Monte Carlo run gets stream i regardless of which
/// worker executes it.
class Philox4x32 {
public:
    using result_type = std::uint64_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) {
            refill();
        }
        return buffer_[lane_++];
    }

    std::uint64_t stream() const noexcept { return stream_; }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    void refill() noexcept {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                         static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        buffer_[0] = (std::uint64_t{ctr[1]} << 32) | ctr[0];
        buffer_[1] = (std::uint64_t{ctr[3]} << 32) | ctr[2];
        ++block_;
        lane_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
};

/// Uniform on the open interval (0, 1).
template <BitGenerator64 G>
inline double uniform_open(G& gen) {
    return (static_cast<double>(gen() >> 12) + 0.5) * 0x1.0p-52;
}

/// Exp(rate) by inversion. Consumes exactly one word.
template <BitGenerator64 G>
inline double exponential(G& gen, double rate) {
    return -std::log(uniform_open(gen)) / rate;
}

}  // namespace hawkes_ruin
