#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ocft {

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator and
/// provides a 2^128-step jump for non-overlapping substreams.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Advance by 2^128 draws.
    void jump() {
        static constexpr std::array<std::uint64_t, 4> kJump = {
            0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL, 0xa9582618e03fc9aaULL,
            0x39abdc4529b1661cULL};
        std::array<std::uint64_t, 4> acc{};
        for (std::uint64_t word : kJump) {
            for (int b = 0; b < 64; ++b) {
                if (word & (std::uint64_t{1} << b))
                    for (int k = 0; k < 4; ++k) acc[k] ^= state_[k];
                (*this)();
            }
        }
        state_ = acc;
    }

    /// Uniform double in [0, 1).
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_open_zero() { return double(((*this)() >> 11) + 1) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::array<std::uint64_t, 4> state_{};
};

/// A reproducible random stream: identical (seed, stream_index) pairs yield
/// identical sequences; distinct indices are separated by jumps.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;

    Xoshiro256pp engine() const {
        Xoshiro256pp e(seed);
        for (std::uint64_t k = 0; k < stream_index; ++k) e.jump();
        return e;
    }

    /// Independent child seed for the k-th sub-computation (e.g. the two sides
    /// of an identity). Chunks inside one computation use stream_index jumps.
    RngStream substream(std::uint64_t k) const {
        std::uint64_t z = seed ^ (stream_index * 0xd1342543de82ef95ULL) ^
                          ((k + 1) * 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return {z ^ (z >> 31), 0};
    }
};

}  // namespace ocft
