#ifndef BBMH_VW_HPP
#define BBMH_VW_HPP

#include <cstdint>
#include <string>

#include "dataio.hpp"
#include "hash_family.hpp"

namespace bbmh {

// Signed random bin projection: out[bin(t)] += sign(t) over the features.
// bin(t) comes from a 2U family over the bin space; sign(t) from a 4U
// polynomial reduced mod 2, so products of distinct signs are mean-zero and
// hashed inner products stay unbiased.
class VwProjector {
public:
    // bins must be a power of two (the bin hash is the 2U family)
    VwProjector(uint32_t bins, uint64_t seed);

    uint32_t bins() const { return bins_; }
    uint32_t bin_of(uint32_t t) const;
    int sign_of(uint32_t t) const;  // +1 or -1

    // at most min(|x|, bins) nonzeros; opposite signs cancel to zero
    SparseRow project(const FeatureSet& x) const;

private:
    uint32_t bins_;
    uint32_t s_;
    TwoUCoeff bin_;
    FourUCoeff sign_;
};

// corpus -> LibSVM text rows of dimension `bins` (values are signed counts)
uint64_t vw_project_file(const std::string& corpus_path, const std::string& out_path,
                         uint32_t bins, uint64_t seed);

}  // namespace bbmh

#endif
