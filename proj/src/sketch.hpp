#ifndef BBMH_SKETCH_HPP
#define BBMH_SKETCH_HPP

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "dataio.hpp"
#include "hash_family.hpp"

namespace bbmh {

inline constexpr uint64_t kEmptyMinimum = UINT64_MAX;
inline constexpr uint8_t kFlagEmptySet = 0x01;

struct SketchHeader {
    HashScheme scheme = HashScheme::TwoU;
    uint8_t b = 8;
    uint32_t k = 0;
    uint64_t dim = 0;
    uint64_t seed = 0;

    bool operator==(const SketchHeader&) const = default;
};

inline size_t packed_code_bytes(uint32_t k, uint32_t b) { return (size_t(k) * b + 7) / 8; }

// codes are bit-packed little-endian within bytes, j ascending
uint32_t get_code(const uint8_t* codes, uint32_t j, uint32_t b);
void set_code(uint8_t* codes, uint32_t j, uint32_t b, uint32_t code);

struct SketchRecord {
    int8_t label = 1;
    uint8_t flags = 0;
    std::vector<uint8_t> codes;    // packed_code_bytes(k, b)
    std::vector<uint64_t> minima;  // k entries when retained, else empty

    bool empty_set() const { return flags & kFlagEmptySet; }
};

// k minima over the mapped feature ids plus their low-b-bit codes. An empty
// set yields the all-ones sentinel in every position and the empty flag.
SketchRecord sketch_one(const HashFamily& family, const FeatureSet& set, uint8_t b,
                        bool keep_minima);

// Sketch file: magic "BBMH", version u8, scheme u8, b u8, reserved u8,
// k u32-LE, D u64-LE, seed u64-LE, record count u64-LE; then per record
// label i8, flags u8, packed code bytes. Minima go to a sibling ".min64"
// file (k u64-LE per record) when requested.
class SketchWriter {
public:
    SketchWriter(const std::string& path, const SketchHeader& header, bool emit_minima);
    ~SketchWriter();
    SketchWriter(const SketchWriter&) = delete;
    SketchWriter& operator=(const SketchWriter&) = delete;

    void append(const SketchRecord& rec);
    void close();

    static std::string minima_path(const std::string& sketch_path) {
        return sketch_path + ".min64";
    }

private:
    FILE* f_ = nullptr;
    FILE* fmin_ = nullptr;
    SketchHeader header_;
    uint64_t count_ = 0;
};

class SketchReader {
public:
    explicit SketchReader(const std::string& path);
    ~SketchReader();
    SketchReader(const SketchReader&) = delete;
    SketchReader& operator=(const SketchReader&) = delete;

    const SketchHeader& header() const { return header_; }
    uint64_t count() const { return count_; }
    bool has_minima() const { return fmin_ != nullptr; }

    bool next(SketchRecord& out);             // sequential scan
    SketchRecord record(uint64_t i);          // random access
    void reset();

private:
    void read_record(SketchRecord& out);

    FILE* f_ = nullptr;
    FILE* fmin_ = nullptr;
    SketchHeader header_;
    uint64_t count_ = 0;
    uint64_t pos_ = 0;
    long data_offset_ = 0;
};

}  // namespace bbmh

#endif
