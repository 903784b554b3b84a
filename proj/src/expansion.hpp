#ifndef BBMH_EXPANSION_HPP
#define BBMH_EXPANSION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sketch.hpp"

namespace bbmh {

// b-bit codes as a 2^b * k dimensional binary vector with exactly k ones;
// the inner product of two expansions counts matching codes.
struct ExpandedVector {
    uint64_t dim = 0;
    std::vector<uint32_t> ones;  // ones[j] = j * 2^b + code_j, ascending
    int8_t label = 1;
};

// Throws EmptySketch for flagged records and DimensionExceeded when
// 2^b * k overflows 32-bit row indices.
ExpandedVector expand(const SketchRecord& rec, uint32_t k, uint32_t b);

uint64_t expanded_dim(uint32_t k, uint32_t b);

// exact inner product of two expansions = number of matching codes
uint64_t expansion_inner_product(const ExpandedVector& x, const ExpandedVector& y);

enum class RowFormat { LibsvmText, Binary };

// Sketch file -> learner-format stream, order preserving. Flagged records
// are emitted as empty rows so record numbering survives.
uint64_t expand_stream(const std::string& sketch_path, const std::string& out_path,
                       RowFormat format);

}  // namespace bbmh

#endif
