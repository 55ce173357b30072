#pragma once
// Counter-based RNG (Philox4x32-10) so parallel path simulations stay
// deterministic for a given (seed, stream) regardless of scheduling.
#include <array>
#include <cmath>
#include <cstdint>

namespace metriclab {

struct PhiloxBlock {
    std::array<std::uint32_t, 4> x;
};

// Philox4x32-10 keyed block function; matches the Random123 test vectors.
inline PhiloxBlock philox4x32(std::array<std::uint32_t, 4> ctr,
                              std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = M0 * static_cast<std::uint64_t>(ctr[0]);
        const std::uint64_t p1 = M1 * static_cast<std::uint64_t>(ctr[2]);
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return PhiloxBlock{ctr};
}

// One independent stream per (seed, stream id); counter advances per block.
// All draws are pure functions of (seed, stream, counter), so any layout of
// work across threads reproduces the same numbers.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    // Uniform on (0,1); never returns 0 or 1 exactly.
    double uniform() {
        refill_if_needed();
        const std::uint32_t raw = buf_[pos_++];
        return (static_cast<double>(raw) + 0.5) * 0x1p-32;
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Integer in [0, n).
    std::uint32_t below(std::uint32_t n) {
        refill_if_needed();
        return buf_[pos_++] % n;
    }

  private:
    void refill_if_needed() {
        if (pos_ < 4) return;
        const PhiloxBlock b = philox4x32(
            {static_cast<std::uint32_t>(ctr_), static_cast<std::uint32_t>(ctr_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        buf_ = b.x;
        pos_ = 0;
        ++ctr_;
    }

    std::uint64_t seed_, stream_;
    std::uint64_t ctr_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace metriclab
