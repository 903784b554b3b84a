#include "expansion.hpp"

#include <cstdio>

#include "dataio.hpp"

namespace bbmh {

uint64_t expanded_dim(uint32_t k, uint32_t b) {
    if (b < 1 || b > 32) fail(Errc::InvalidArgument, "b must be in 1..32");
    const uint64_t dim = (uint64_t(1) << b) * k;
    if (dim > (uint64_t(1) << 32))
        fail(Errc::DimensionExceeded, "2^b * k exceeds 32-bit row indices");
    return dim;
}

ExpandedVector expand(const SketchRecord& rec, uint32_t k, uint32_t b) {
    if (rec.empty_set()) fail(Errc::EmptySketch, "cannot expand a flagged empty-set sketch");
    ExpandedVector out;
    out.dim = expanded_dim(k, b);
    out.label = rec.label;
    out.ones.resize(k);
    const uint64_t block = uint64_t(1) << b;
    for (uint32_t j = 0; j < k; ++j)
        out.ones[j] = uint32_t(block * j + get_code(rec.codes.data(), j, b));
    return out;
}

uint64_t expansion_inner_product(const ExpandedVector& x, const ExpandedVector& y) {
    if (x.dim != y.dim) fail(Errc::DimensionExceeded, "expansion dims differ");
    uint64_t dot = 0;
    size_t i = 0, j = 0;
    while (i < x.ones.size() && j < y.ones.size()) {
        if (x.ones[i] < y.ones[j]) {
            ++i;
        } else if (y.ones[j] < x.ones[i]) {
            ++j;
        } else {
            ++dot;
            ++i;
            ++j;
        }
    }
    return dot;
}

uint64_t expand_stream(const std::string& sketch_path, const std::string& out_path,
                       RowFormat format) {
    SketchReader reader(sketch_path);
    const uint32_t k = reader.header().k;
    const uint32_t b = reader.header().b;
    const uint64_t dim = expanded_dim(k, b);

    uint64_t n = 0;
    SketchRecord rec;
    if (format == RowFormat::Binary) {
        CorpusWriter w(out_path, dim);
        FeatureSet fs;
        while (reader.next(rec)) {
            fs.label = rec.label;
            if (rec.empty_set()) {
                fs.indices.clear();
            } else {
                ExpandedVector ev = expand(rec, k, b);
                fs.indices = std::move(ev.ones);
            }
            w.append(fs);
            ++n;
        }
        w.close();
    } else {
        FILE* f = std::fopen(out_path.c_str(), "wb");
        if (!f) fail(Errc::Io, out_path + ": cannot open for writing");
        SparseRow row;
        while (reader.next(rec)) {
            row.label = rec.label;
            row.values.clear();
            if (rec.empty_set()) {
                row.indices.clear();
            } else {
                ExpandedVector ev = expand(rec, k, b);
                row.indices = std::move(ev.ones);
            }
            write_libsvm(f, row);
            ++n;
        }
        std::fclose(f);
    }
    return n;
}

}  // namespace bbmh
