#pragma once

// Counter-based random streams (Philox4x32-10) and the handful of variates the
// samplers need. Variates are generated by fixed algorithms so that a given
// (seed, stream) produces the same sequence on every platform.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ccmm {

/// Philox4x32 with 10 rounds.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// One independent stream per (seed, stream id). Not thread-safe; give each chain its own.
class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream_id) {}

    std::uint64_t next_u64() {
        if (pos_ == 4) refill();
        const std::uint64_t hi = block_[pos_++];
        const std::uint64_t lo = block_[pos_++];
        return (hi << 32) | lo;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // rejection keeps the result unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

    /// InvGamma(shape, scale): density proportional to x^(-shape-1) exp(-scale/x).
    double inv_gamma(double shape, double scale) { return scale / gamma(shape); }

    std::uint64_t blocks_used() const noexcept { return counter_; }

private:
    void refill() {
        block_ = philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                               key_);
        ++counter_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_{0, 0};
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ccmm
