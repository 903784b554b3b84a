#ifndef BBMH_PRNG_HPP
#define BBMH_PRNG_HPP

#include <cassert>
#include <cstdint>

namespace bbmh {

// splitmix64 finalizer; bijective on 64-bit words
constexpr uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// Counter-based draw keyed by (seed, tag, j, i). Every coefficient in the
// library is a pure function of its key, so families regenerate bit-identically
// from the seed and can be built from any thread without shared state.
constexpr uint64_t keyed_u64(uint64_t seed, uint64_t tag, uint64_t j, uint64_t i) {
    uint64_t x = mix64(seed + 0x9e3779b97f4a7c15ull * (tag + 1));
    x = mix64(x ^ (j + 0xd1b54a32d192ed03ull));
    x = mix64(x ^ (i + 0x8cb92ba72f3d8dd7ull));
    return x;
}

// Stream keys for the module-level tags used across the library.
namespace rngtag {
inline constexpr uint64_t kPermutation = 1;
inline constexpr uint64_t kTwoU = 2;
inline constexpr uint64_t kFourU = 3;
inline constexpr uint64_t kSynthPair = 4;
inline constexpr uint64_t kSynthCorpus = 5;
inline constexpr uint64_t kMseRep = 6;
inline constexpr uint64_t kVwBins = 7;
inline constexpr uint64_t kVwSign = 8;
inline constexpr uint64_t kShuffle = 9;
}  // namespace rngtag

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix64(state_);
    }

    // uniform in [0, bound) by rejection; exact, no modulo bias
    uint64_t next_below(uint64_t bound) {
        assert(bound > 0);
        if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    // uniform double in [0, 1)
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

}  // namespace bbmh

#endif
