#pragma once

#include <array>
#include <cstdint>

namespace riskalloc {

namespace detail {

// splitmix64 output function; also used to derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256** engine addressed by (seed, stream_id). Estimators derive one
// stream per sample chunk, so results do not depend on worker count.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0) {
        std::uint64_t z = detail::mix64(seed) ^ detail::mix64(stream_id * 0xd2b74407b1ce6e93ULL + 1);
        for (auto& word : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            word = detail::mix64(z);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on the open interval (0,1); safe to feed into quantile functions.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::array<std::uint64_t, 4> state_;
};

}  // namespace riskalloc
