#pragma once

// Philox4x32-10 counter-based generator. A stream is identified by
// (seed, stream_id); draws are reproducible on every platform.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace gparc::random {

using Philox4x32Block = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 evaluation.
constexpr Philox4x32Block philox4x32(Philox4x32Block ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Uniform random bit generator over one Philox stream. Counter layout:
/// words 0-1 hold the block index, words 2-3 the stream id; the key is the
/// seed.
class PhiloxStream {
public:
    using result_type = std::uint32_t;

    PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_id_(stream_id) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (index_ == 4) {
            block_ = philox4x32({static_cast<std::uint32_t>(counter_),
                                 static_cast<std::uint32_t>(counter_ >> 32),
                                 static_cast<std::uint32_t>(stream_id_),
                                 static_cast<std::uint32_t>(stream_id_ >> 32)},
                                key_);
            ++counter_;
            index_ = 0;
        }
        return block_[index_++];
    }

    /// Uniform double in the open interval (0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by the Box-Muller transform.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    Philox4x32Block block_{};
    int index_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gparc::random
