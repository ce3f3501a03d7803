#include "ruinlab/rng.hpp"

namespace ruinlab {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index)
    : seed_(seed), index_(index) {
    // Seed-expansion via splitmix64; the index enters through its own
    // avalanche so that consecutive indices land far apart in state space.
    std::uint64_t z = mix64(seed) ^ mix64(index ^ 0x6a09e667f3bcc909ULL);
    for (auto& w : s_) {
        z += 0x9e3779b97f4a7c15ULL;
        w = mix64(z);
    }
    // All-zero state is the one forbidden point of xoshiro256++.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

RngStream RngStream::child(std::uint64_t k) const {
    return RngStream(seed_, mix64(index_) + k + 1);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() {
    // Top 53 bits -> (0,1): add half an ulp so 0 cannot occur.
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return u;
}

}  // namespace ruinlab
