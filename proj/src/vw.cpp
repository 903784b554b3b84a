#include "vw.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

#include "prng.hpp"

namespace bbmh {

VwProjector::VwProjector(uint32_t bins, uint64_t seed) : bins_(bins) {
    if (bins < 1 || (bins & (bins - 1)) != 0)
        fail(Errc::UnsupportedUniverse, "bin count must be a power of two");
    s_ = uint32_t(std::countr_zero(bins));
    bin_.a1 = uint32_t(keyed_u64(seed, rngtag::kVwBins, 0, 0));
    bin_.a2 = uint32_t(keyed_u64(seed, rngtag::kVwBins, 0, 1)) | 1u;
    for (uint64_t i = 0; i < 4; ++i) {
        // rejection below p; retries use later counters
        uint64_t v;
        uint64_t attempt = 0;
        do {
            v = keyed_u64(seed, rngtag::kVwSign, attempt++, i) >> 33;  // 31 bits
        } while (v >= kMersenne31);
        sign_.a[i] = v;
    }
}

uint32_t VwProjector::bin_of(uint32_t t) const { return eval_2u(bin_, t, s_); }

int VwProjector::sign_of(uint32_t t) const {
    const uint64_t h = eval_4u(sign_, t, [](uint64_t v) { return mod_mersenne31(v); });
    return (h & 1) ? 1 : -1;
}

SparseRow VwProjector::project(const FeatureSet& x) const {
    std::vector<std::pair<uint32_t, float>> acc;
    acc.reserve(x.indices.size());
    for (uint32_t t : x.indices) {
        if (t >= kMersenne31)
            fail(Errc::UnsupportedUniverse, "feature id must be < 2^31-1 for the sign hash");
        acc.emplace_back(bin_of(t), float(sign_of(t)));
    }
    std::sort(acc.begin(), acc.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SparseRow out;
    out.label = x.label;
    size_t i = 0;
    while (i < acc.size()) {
        const uint32_t bin = acc[i].first;
        float sum = 0;
        for (; i < acc.size() && acc[i].first == bin; ++i) sum += acc[i].second;
        if (sum != 0) {
            out.indices.push_back(bin);
            out.values.push_back(sum);
        }
    }
    return out;
}

uint64_t vw_project_file(const std::string& corpus_path, const std::string& out_path,
                         uint32_t bins, uint64_t seed) {
    VwProjector proj(bins, seed);
    auto src = open_corpus(corpus_path);
    FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f) fail(Errc::Io, out_path + ": cannot open for writing");
    FeatureSet fs;
    uint64_t n = 0;
    while (src->next(fs)) {
        write_libsvm(f, proj.project(fs));
        ++n;
    }
    std::fclose(f);
    return n;
}

}  // namespace bbmh
