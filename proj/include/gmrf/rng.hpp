#pragma once

// Counter-based random streams (Philox4x32-10) and the scalar variates used by
// the samplers. Output depends only on (seed, stream id, call sequence), so a
// stream can be recreated anywhere, on any thread, and replay exactly.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace gmrf {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                                std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al. 2011).
inline constexpr std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                            std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
        detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Seeded random stream. A value type: copying it forks an identical sequence.
///
/// The Philox key is the 64-bit seed; the 128-bit counter holds the 64-bit
/// stream id and a 64-bit block index. Distinct stream ids therefore address
/// disjoint counter ranges of the same keyed permutation.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Child stream addressed by a (domain, a, b) triple, e.g. (field, iteration, node).
    /// Depends only on this stream's seed and id, never on its position.
    RngStream substream(std::uint64_t domain, std::uint64_t a, std::uint64_t b = 0) const noexcept {
        std::uint64_t h = detail::splitmix64(stream_id_ ^ detail::splitmix64(domain));
        h = detail::splitmix64(h ^ a);
        h = detail::splitmix64(h ^ detail::splitmix64(b + 0x632BE59BD9B4E019ULL));
        return RngStream(seed_, h);
    }

    std::uint64_t next_u64() noexcept {
        if (lane_ == 2) {
            refill();
        }
        return buffer_[lane_++];
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one variate per two uniforms).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double exponential() noexcept { return -std::log(uniform()); }

private:
    void refill() noexcept {
        const auto out = philox4x32_10(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        ++block_;
        lane_ = 0;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
};

inline double draw_normal(RngStream& s, double mean, double sd) {
    if (!(sd > 0.0)) {
        throw std::invalid_argument("draw_normal: sd must be positive");
    }
    return mean + sd * s.normal();
}

/// Gamma(shape, 1) by Marsaglia-Tsang; shapes below one are boosted by U^(1/shape).
inline double draw_gamma(RngStream& s, double shape) {
    if (!(shape > 0.0)) {
        throw std::invalid_argument("draw_gamma: shape must be positive");
    }
    if (shape < 1.0) {
        const double boost = std::pow(s.uniform(), 1.0 / shape);
        return draw_gamma(s, shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = s.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = s.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

/// InvGam(shape, rate) with density proportional to x^(-shape-1) exp(-rate/x).
inline double draw_inverse_gamma(RngStream& s, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("draw_inverse_gamma: shape and rate must be positive");
    }
    return rate / draw_gamma(s, shape);
}

}  // namespace gmrf
