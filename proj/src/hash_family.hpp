#ifndef BBMH_HASH_FAMILY_HPP
#define BBMH_HASH_FAMILY_HPP

#include <cassert>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace bbmh {

enum class HashScheme : uint8_t {
    Permutation = 0,
    TwoU = 1,      // multiply-add over 2^32, top s bits
    FourUMod = 2,  // cubic over GF(p), division modulo
    FourUBit = 3,  // cubic over GF(p), p = 2^31-1 via shift/mask reduction
};

const char* scheme_name(HashScheme s);
HashScheme scheme_from_name(const std::string& name);

inline constexpr uint64_t kMersenne31 = (1ull << 31) - 1;

// v mod (2^31-1) using only shifts, masks, adds, compares; requires v < 2^62
inline uint64_t mod_mersenne31(uint64_t v) {
    assert(v < (1ull << 62));
    constexpr uint64_t p = kMersenne31;
    v = (v >> 31) + (v & p);
    if (v >= 2 * p) v = (v >> 31) + (v & p);
    if (v >= p) return v - p;
    return v;
}

struct TwoUCoeff {
    uint32_t a1;  // uniform over {0..2^32-1}
    uint32_t a2;  // odd, uniform over {1,3,..,2^32-1}
};

struct FourUCoeff {
    uint64_t a[4];  // each uniform over {0..p-1}
};

// One 2U evaluation: (a1 + a2*t mod 2^32) reduced to s output bits by taking
// the top bits of the 32-bit product. The low-bit reduction written as
// "mod 2^s" is degenerate here: with a2 odd the low s bits of a2*t are an
// affine bijection of the low s bits of t, so pairwise collisions would be
// deterministic. Top bits carry the multiply-add randomness.
inline uint32_t eval_2u(TwoUCoeff c, uint32_t t, uint32_t s) {
    uint32_t h = c.a1 + c.a2 * t;  // natural 32-bit overflow
    return s >= 32 ? h : h >> (32 - s);
}

// One 4U evaluation over GF(p): Horner on a1 + a2 t + a3 t^2 + a4 t^3 with a
// reduction after every multiply-accumulate so intermediates stay < 2^62.
// Requires t < p.
template <typename Reduce>
inline uint64_t eval_4u(const FourUCoeff& c, uint64_t t, Reduce reduce) {
    uint64_t h = c.a[3];
    h = reduce(h * t + c.a[2]);
    h = reduce(h * t + c.a[1]);
    h = reduce(h * t + c.a[0]);
    return h;
}

// k index mappings {0..D-1} -> {0..D-1} standing in for random permutations.
// Immutable once built; safe to share across threads.
class HashFamily {
public:
    static constexpr uint64_t kDefaultPermCapBytes = 1ull << 30;

    // Throws UnsupportedUniverse / PermutationTooLarge / InvalidArgument.
    static HashFamily build(HashScheme scheme, uint64_t dim, uint32_t k, uint64_t seed,
                            uint64_t prime = kMersenne31,
                            uint64_t perm_cap_bytes = kDefaultPermCapBytes);

    // j in [0,k), t in [0,dim); contract violations are programming errors
    uint32_t map(uint32_t j, uint32_t t) const {
        assert(j < k_ && uint64_t(t) < dim_);
        switch (scheme_) {
            case HashScheme::TwoU:
                return eval_2u(twou_[j], t, s_);
            case HashScheme::FourUBit:
                return reduce_dim(eval_4u(fouru_[j], t, [](uint64_t v) { return mod_mersenne31(v); }));
            case HashScheme::FourUMod: {
                const uint64_t p = p_;
                return reduce_dim(eval_4u(fouru_[j], t, [p](uint64_t v) { return v % p; }));
            }
            case HashScheme::Permutation:
                return perm_[size_t(j) * dim_ + t];
        }
        return 0;  // unreachable
    }

    HashScheme scheme() const { return scheme_; }
    uint64_t dim() const { return dim_; }
    uint32_t k() const { return k_; }
    uint64_t seed() const { return seed_; }
    uint64_t prime() const { return p_; }
    uint32_t dim_log2() const { return s_; }  // TwoU only

    const std::vector<TwoUCoeff>& twou_coeffs() const { return twou_; }
    const std::vector<FourUCoeff>& fouru_coeffs() const { return fouru_; }

private:
    HashFamily() = default;

    uint32_t reduce_dim(uint64_t h) const {
        return uint32_t(dim_pow2_ ? (h & (dim_ - 1)) : (h % dim_));
    }

    HashScheme scheme_ = HashScheme::TwoU;
    uint64_t dim_ = 0;
    uint32_t k_ = 0;
    uint64_t seed_ = 0;
    uint32_t s_ = 0;
    bool dim_pow2_ = false;
    uint64_t p_ = kMersenne31;
    std::vector<TwoUCoeff> twou_;
    std::vector<FourUCoeff> fouru_;
    std::vector<uint32_t> perm_;  // k contiguous tables of dim entries
};

bool is_prime_u64(uint64_t n);

}  // namespace bbmh

#endif
