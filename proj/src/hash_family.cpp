#include "hash_family.hpp"

#include <bit>
#include <string>

#include "prng.hpp"

namespace bbmh {

const char* scheme_name(HashScheme s) {
    switch (s) {
        case HashScheme::Permutation: return "perm";
        case HashScheme::TwoU: return "2u";
        case HashScheme::FourUMod: return "4u-mod";
        case HashScheme::FourUBit: return "4u-bit";
    }
    return "?";
}

HashScheme scheme_from_name(const std::string& name) {
    if (name == "perm" || name == "permutation") return HashScheme::Permutation;
    if (name == "2u") return HashScheme::TwoU;
    if (name == "4u-mod" || name == "4umod") return HashScheme::FourUMod;
    if (name == "4u-bit" || name == "4ubit" || name == "4u") return HashScheme::FourUBit;
    fail(Errc::InvalidArgument, "unknown hash scheme: " + name);
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d : {2ull, 3ull, 5ull, 7ull}) {
        if (n % d == 0) return n == d;
    }
    for (uint64_t d = 11; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

namespace {

// uniform draw below `bound` from the (seed, tag, j) stream; counter i leaves
// room for rejection retries
uint64_t keyed_below(uint64_t seed, uint64_t tag, uint64_t j, uint64_t i, uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (uint64_t attempt = 0;; ++attempt) {
        uint64_t v = keyed_u64(seed, tag, j, i * 64 + attempt);
        if (v < limit) return v % bound;
    }
}

}  // namespace

HashFamily HashFamily::build(HashScheme scheme, uint64_t dim, uint32_t k, uint64_t seed,
                             uint64_t prime, uint64_t perm_cap_bytes) {
    if (dim < 1) fail(Errc::InvalidArgument, "universe size must be >= 1");
    if (k < 1) fail(Errc::InvalidArgument, "k must be >= 1");

    HashFamily fam;
    fam.scheme_ = scheme;
    fam.dim_ = dim;
    fam.k_ = k;
    fam.seed_ = seed;
    fam.dim_pow2_ = (dim & (dim - 1)) == 0;
    fam.s_ = fam.dim_pow2_ ? uint32_t(std::countr_zero(dim)) : 0;

    switch (scheme) {
        case HashScheme::TwoU: {
            if (!fam.dim_pow2_ || dim > (1ull << 32))
                fail(Errc::UnsupportedUniverse,
                     "2u requires a power-of-two universe <= 2^32, got " + std::to_string(dim));
            fam.twou_.resize(k);
            for (uint32_t j = 0; j < k; ++j) {
                fam.twou_[j].a1 = uint32_t(keyed_u64(seed, rngtag::kTwoU, j, 0));
                fam.twou_[j].a2 = uint32_t(keyed_u64(seed, rngtag::kTwoU, j, 1)) | 1u;
            }
            break;
        }
        case HashScheme::FourUMod:
        case HashScheme::FourUBit: {
            uint64_t p = prime;
            if (scheme == HashScheme::FourUBit && p != kMersenne31)
                fail(Errc::InvalidArgument, "4u-bit is fixed to p = 2^31-1");
            if (p > kMersenne31)
                fail(Errc::InvalidArgument, "prime modulus must be <= 2^31-1");
            if (!is_prime_u64(p)) fail(Errc::InvalidArgument, "modulus is not prime");
            if (dim >= p)
                fail(Errc::UnsupportedUniverse, "universe size " + std::to_string(dim) +
                                                    " must be < p = " + std::to_string(p));
            fam.p_ = p;
            fam.fouru_.resize(k);
            for (uint32_t j = 0; j < k; ++j) {
                for (uint64_t i = 0; i < 4; ++i) {
                    fam.fouru_[j].a[i] = keyed_below(seed, rngtag::kFourU, j, i, p);
                }
            }
            break;
        }
        case HashScheme::Permutation: {
            const uint64_t bytes = dim * uint64_t(k) * sizeof(uint32_t);
            if (dim > (1ull << 32) || bytes / sizeof(uint32_t) / k != dim ||
                bytes > perm_cap_bytes)
                fail(Errc::PermutationTooLarge,
                     "permutation tables need " + std::to_string(dim * k * 4) +
                         " bytes, cap is " + std::to_string(perm_cap_bytes));
            fam.perm_.resize(size_t(dim) * k);
            for (uint32_t j = 0; j < k; ++j) {
                uint32_t* tab = fam.perm_.data() + size_t(j) * dim;
                for (uint64_t t = 0; t < dim; ++t) tab[t] = uint32_t(t);
                SplitMix64 rng(keyed_u64(seed, rngtag::kPermutation, j, 0));
                for (uint64_t t = dim - 1; t > 0; --t) {
                    uint64_t r = rng.next_below(t + 1);
                    std::swap(tab[t], tab[r]);
                }
            }
            break;
        }
    }
    return fam;
}

}  // namespace bbmh
