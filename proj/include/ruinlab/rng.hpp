#pragma once

#include <cmath>
#include <cstdint>

namespace ruinlab {

// splitmix64 finalizer: cheap full-avalanche mixing of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-addressed xoshiro256++ stream.
//
// A stream is identified by (seed, index).  The four state words are produced
// by iterating splitmix64 from mix64(seed) xor mix64(index ^ tweak), so equal
// identifiers always reproduce the same draws while distinct indices give
// statistically independent streams.  child(k) derives a sub-stream whose
// index is a mix of the parent's index and k; the scheme is deterministic and
// does not depend on how work is scheduled across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t index = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

    // Deterministic sub-stream #k of this stream.
    RngStream child(std::uint64_t k) const;

    std::uint64_t next_u64();

    // Uniform draw strictly inside (0, 1): 53-bit mantissa, zero mapped away.
    double uniform();

    // Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t index_;
};

}  // namespace ruinlab
