#include "sketch.hpp"

#include <cerrno>
#include <cstring>

namespace bbmh {

namespace {

constexpr char kSketchMagic[4] = {'B', 'B', 'M', 'H'};
constexpr uint8_t kSketchVersion = 1;
constexpr long kHeaderBytes = 4 + 4 + 4 + 8 + 8 + 8;  // magic, 4x u8, k, D, seed, count

FILE* open_or_fail(const std::string& path, const char* mode) {
    FILE* f = std::fopen(path.c_str(), mode);
    if (!f) fail(Errc::Io, path + ": " + std::strerror(errno));
    return f;
}

void write_all(FILE* f, const void* data, size_t n) {
    if (std::fwrite(data, 1, n, f) != n) fail(Errc::Io, "short write");
}

void read_all(FILE* f, void* data, size_t n) {
    if (std::fread(data, 1, n, f) != n) fail(Errc::Io, "short read");
}

void put_u32(FILE* f, uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    write_all(f, b, 4);
}

void put_u64(FILE* f, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
    write_all(f, b, 8);
}

uint32_t get_u32(FILE* f) {
    uint8_t b[4];
    read_all(f, b, 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint64_t get_u64(FILE* f) {
    uint8_t b[8];
    read_all(f, b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

}  // namespace

uint32_t get_code(const uint8_t* codes, uint32_t j, uint32_t b) {
    uint32_t out = 0;
    size_t pos = size_t(j) * b;
    for (uint32_t i = 0; i < b; ++i, ++pos) {
        out |= uint32_t((codes[pos >> 3] >> (pos & 7)) & 1u) << i;
    }
    return out;
}

void set_code(uint8_t* codes, uint32_t j, uint32_t b, uint32_t code) {
    size_t pos = size_t(j) * b;
    for (uint32_t i = 0; i < b; ++i, ++pos) {
        if ((code >> i) & 1u) codes[pos >> 3] |= uint8_t(1u << (pos & 7));
    }
}

SketchRecord sketch_one(const HashFamily& family, const FeatureSet& set, uint8_t b,
                        bool keep_minima) {
    if (b < 1 || b > 32) fail(Errc::InvalidArgument, "b must be in 1..32");
    const uint32_t k = family.k();
    SketchRecord rec;
    rec.label = set.label;
    rec.codes.assign(packed_code_bytes(k, b), 0);
    if (keep_minima) rec.minima.assign(k, kEmptyMinimum);

    if (set.indices.empty()) {
        rec.flags = kFlagEmptySet;
        std::memset(rec.codes.data(), 0xff, rec.codes.size());
        // trim trailing slack bits so the packed bytes stay canonical
        if (size_t tail = (size_t(k) * b) & 7; tail != 0)
            rec.codes.back() = uint8_t(0xffu >> (8 - tail));
        return rec;
    }

    const uint32_t mask = b >= 32 ? 0xffffffffu : ((1u << b) - 1);
    for (uint32_t j = 0; j < k; ++j) {
        uint32_t mn = family.map(j, set.indices[0]);
        for (size_t i = 1; i < set.indices.size(); ++i) {
            uint32_t h = family.map(j, set.indices[i]);
            if (h < mn) mn = h;
        }
        if (keep_minima) rec.minima[j] = mn;
        set_code(rec.codes.data(), j, b, mn & mask);
    }
    return rec;
}

SketchWriter::SketchWriter(const std::string& path, const SketchHeader& header, bool emit_minima)
    : header_(header) {
    f_ = open_or_fail(path, "wb");
    write_all(f_, kSketchMagic, 4);
    uint8_t head[4] = {kSketchVersion, uint8_t(header.scheme), header.b, 0};
    write_all(f_, head, 4);
    put_u32(f_, header.k);
    put_u64(f_, header.dim);
    put_u64(f_, header.seed);
    put_u64(f_, 0);  // count patched in close()
    if (emit_minima) fmin_ = open_or_fail(minima_path(path), "wb");
}

SketchWriter::~SketchWriter() {
    if (f_) close();
}

void SketchWriter::append(const SketchRecord& rec) {
    write_all(f_, &rec.label, 1);
    write_all(f_, &rec.flags, 1);
    write_all(f_, rec.codes.data(), rec.codes.size());
    if (fmin_) {
        if (rec.minima.size() != header_.k)
            fail(Errc::MissingMinima, "record lacks minima but a .min64 file was requested");
        for (uint64_t m : rec.minima) put_u64(fmin_, m);
    }
    ++count_;
}

void SketchWriter::close() {
    if (!f_) return;
    if (std::fseek(f_, kHeaderBytes - 8, SEEK_SET) != 0) fail(Errc::Io, "seek failed");
    put_u64(f_, count_);
    std::fclose(f_);
    f_ = nullptr;
    if (fmin_) {
        std::fclose(fmin_);
        fmin_ = nullptr;
    }
}

SketchReader::SketchReader(const std::string& path) {
    f_ = open_or_fail(path, "rb");
    char magic[4];
    read_all(f_, magic, 4);
    if (std::memcmp(magic, kSketchMagic, 4) != 0)
        fail(Errc::MalformedLine, path + ": not a BBMH sketch file");
    uint8_t head[4];
    read_all(f_, head, 4);
    if (head[0] != kSketchVersion) fail(Errc::MalformedLine, path + ": unknown version");
    if (head[1] > uint8_t(HashScheme::FourUBit))
        fail(Errc::MalformedLine, path + ": unknown scheme tag");
    header_.scheme = HashScheme(head[1]);
    header_.b = head[2];
    header_.k = get_u32(f_);
    header_.dim = get_u64(f_);
    header_.seed = get_u64(f_);
    count_ = get_u64(f_);
    data_offset_ = kHeaderBytes;
    FILE* fm = std::fopen(SketchWriter::minima_path(path).c_str(), "rb");
    fmin_ = fm;  // optional sibling
}

SketchReader::~SketchReader() {
    if (f_) std::fclose(f_);
    if (fmin_) std::fclose(fmin_);
}

void SketchReader::read_record(SketchRecord& out) {
    read_all(f_, &out.label, 1);
    read_all(f_, &out.flags, 1);
    out.codes.resize(packed_code_bytes(header_.k, header_.b));
    read_all(f_, out.codes.data(), out.codes.size());
    if (fmin_) {
        out.minima.resize(header_.k);
        for (uint32_t j = 0; j < header_.k; ++j) out.minima[j] = get_u64(fmin_);
    } else {
        out.minima.clear();
    }
}

bool SketchReader::next(SketchRecord& out) {
    if (pos_ >= count_) return false;
    read_record(out);
    ++pos_;
    return true;
}

SketchRecord SketchReader::record(uint64_t i) {
    if (i >= count_) fail(Errc::InvalidArgument, "record index out of range");
    const long rec_bytes = long(2 + packed_code_bytes(header_.k, header_.b));
    if (std::fseek(f_, data_offset_ + long(i) * rec_bytes, SEEK_SET) != 0)
        fail(Errc::Io, "seek failed");
    if (fmin_ && std::fseek(fmin_, long(i) * long(header_.k) * 8, SEEK_SET) != 0)
        fail(Errc::Io, "seek failed");
    SketchRecord rec;
    read_record(rec);
    pos_ = i + 1;
    return rec;
}

void SketchReader::reset() {
    if (std::fseek(f_, data_offset_, SEEK_SET) != 0) fail(Errc::Io, "seek failed");
    if (fmin_) std::rewind(fmin_);
    pos_ = 0;
}

}  // namespace bbmh
