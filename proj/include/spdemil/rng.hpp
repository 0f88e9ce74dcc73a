#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace spdemil {

/// Philox4x32-10 counter-based bijection (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2511F53u;
    constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = kMul0 * ctr[0];
        const std::uint64_t p1 = kMul1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
    }
    return ctr;
}

/// What a substream is used for. Distinct purposes never share state.
enum class StreamPurpose : std::uint32_t {
    increments = 1,
    levy_area = 2,
    bridge = 3,
    test = 15,
};

/// Identity of a substream within one seed.
struct StreamId {
    std::uint64_t path = 0;
    std::uint64_t step = 0;
    StreamPurpose purpose = StreamPurpose::test;
};

/// Sequential view of one substream. Satisfies UniformRandomBitGenerator.
///
/// The starting state is the Philox4x32-10 image of the counter
/// (lane, purpose, step, path) under a key taken from the seed; draws within
/// the substream then follow xoshiro256++. Results depend only on
/// (seed, id) and the number of draws taken, so paths and steps can be
/// generated in any order or on any thread.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, StreamId id);

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

    /// Standard normal variate.
    double normal();
    void fill_normal(std::span<double> out);

    /// Number of normal variates delivered so far.
    std::uint64_t normals_drawn() const noexcept { return normals_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t normals_ = 0;
};

}  // namespace spdemil
