#include "spdemil/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <stdexcept>

namespace spdemil {

namespace {

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, StreamId id) {
    if (hi32(id.step) != 0 || hi32(id.path) != 0) {
        throw std::out_of_range("RandomStream: step and path indices must fit in 32 bits");
    }
    const std::array<std::uint32_t, 2> key{lo32(seed), hi32(seed)};
    const auto purpose = static_cast<std::uint32_t>(id.purpose);
    const auto a = philox4x32({0u, purpose, lo32(id.step), lo32(id.path)}, key);
    const auto b = philox4x32({1u, purpose, lo32(id.step), lo32(id.path)}, key);
    state_ = {join(a[0], a[1]), join(a[2], a[3]), join(b[0], b[1]), join(b[2], b[3])};
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 0x9E3779B97F4A7C15ull;
    }
}

double RandomStream::normal() {
    // boost's ziggurat keeps no state between calls, so each variate depends
    // only on the engine output sequence.
    boost::random::normal_distribution<double> standard;
    ++normals_;
    return standard(*this);
}

void RandomStream::fill_normal(std::span<double> out) {
    for (double& x : out) {
        x = normal();
    }
}

}  // namespace spdemil
