#include "dataio.hpp"

#include <algorithm>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "prng.hpp"

namespace bbmh {

namespace {

constexpr char kCorpusMagic[4] = {'B', 'B', 'C', 'V'};
constexpr uint8_t kCorpusVersion = 1;

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

SparseRow parse_libsvm(const std::string& line, uint64_t line_no, const LibsvmOptions& opt) {
    auto malformed = [&](const char* what) {
        fail(Errc::MalformedLine, "line " + std::to_string(line_no) + ": " + what);
    };

    SparseRow row;
    const char* p = line.c_str();
    char* end = nullptr;
    errno = 0;
    double label = std::strtod(p, &end);
    if (end == p) malformed("missing label");
    if (label == 1 || label == -1) {
        row.label = int8_t(label);
    } else if (opt.accept01 && label == 0) {
        row.label = -1;
    } else {
        malformed("label must be +-1 (or 0/1)");
    }
    p = end;

    int64_t prev = -1;
    while (true) {
        while (*p == ' ' || *p == '\t') ++p;
        if (*p == '\0' || *p == '\n' || *p == '\r' || *p == '#') break;
        errno = 0;
        long long idx = std::strtoll(p, &end, 10);
        if (end == p || *end != ':') malformed("expected idx:val");
        if (idx < 1 || idx > int64_t(UINT32_MAX))
            malformed("index out of range (1-based u32)");
        if (idx - 1 <= prev)
            fail(Errc::NonAscendingIndex,
                 "line " + std::to_string(line_no) + ": indices must be strictly ascending");
        prev = idx - 1;
        p = end + 1;
        double val = std::strtod(p, &end);
        if (end == p) malformed("missing value");
        p = end;
        if (opt.binary && val != 1.0)
            fail(Errc::NonBinaryValue,
                 "line " + std::to_string(line_no) + ": value " + std::to_string(val) +
                     " in binary mode");
        row.indices.push_back(uint32_t(idx - 1));
        row.values.push_back(float(val));
    }
    if (opt.binary) row.values.clear();
    return row;
}

FeatureSet to_feature_set(SparseRow&& row) {
    FeatureSet fs;
    fs.indices = std::move(row.indices);
    fs.label = row.label;
    return fs;
}

void write_libsvm(FILE* f, const SparseRow& row) {
    std::fprintf(f, "%+d", int(row.label));
    for (size_t i = 0; i < row.indices.size(); ++i) {
        if (row.values.empty()) {
            std::fprintf(f, " %" PRIu32 ":1", row.indices[i] + 1);
        } else {
            std::fprintf(f, " %" PRIu32 ":%g", row.indices[i] + 1, double(row.values[i]));
        }
    }
    std::fputc('\n', f);
}

CorpusWriter::CorpusWriter(const std::string& path, uint64_t dim) : path_(path), dim_(dim) {
    f_ = open_or_fail(path, "wb");
    write_all(f_, kCorpusMagic, 4);
    write_all(f_, &kCorpusVersion, 1);
    put_u64(f_, dim_);
    put_u64(f_, 0);  // count patched in close()
}

CorpusWriter::~CorpusWriter() {
    if (f_) close();
}

void CorpusWriter::append(const FeatureSet& fs) {
    int8_t label = fs.label;
    write_all(f_, &label, 1);
    put_u32(f_, uint32_t(fs.indices.size()));
    for (uint32_t idx : fs.indices) put_u32(f_, idx);
    ++count_;
}

void CorpusWriter::close() {
    if (!f_) return;
    if (std::fseek(f_, 4 + 1 + 8, SEEK_SET) != 0) fail(Errc::Io, "seek failed");
    put_u64(f_, count_);
    std::fclose(f_);
    f_ = nullptr;
}

namespace {

class LibsvmSource : public RecordSource {
public:
    LibsvmSource(std::string path, LibsvmOptions opt) : path_(std::move(path)), opt_(opt) {
        f_ = open_or_fail(path_, "rb");
    }
    ~LibsvmSource() override {
        if (f_) std::fclose(f_);
    }

    bool next(FeatureSet& out) override {
        line_.clear();
        int c;
        while ((c = std::fgetc(f_)) != EOF && c != '\n') line_.push_back(char(c));
        if (line_.empty() && c == EOF) return false;
        ++line_no_;
        if (line_.empty()) return next(out);  // skip blank lines
        out = to_feature_set(parse_libsvm(line_, line_no_, opt_));
        return true;
    }

    void reset() override {
        std::rewind(f_);
        line_no_ = 0;
    }

    uint64_t dim() const override { return 0; }

private:
    std::string path_;
    LibsvmOptions opt_;
    FILE* f_ = nullptr;
    std::string line_;
    uint64_t line_no_ = 0;
};

class BinarySource : public RecordSource {
public:
    explicit BinarySource(std::string path) : path_(std::move(path)) {
        f_ = open_or_fail(path_, "rb");
        char magic[4];
        read_all(f_, magic, 4);
        if (std::memcmp(magic, kCorpusMagic, 4) != 0)
            fail(Errc::MalformedLine, path_ + ": not a BBCV corpus");
        uint8_t version;
        read_all(f_, &version, 1);
        if (version != kCorpusVersion)
            fail(Errc::MalformedLine, path_ + ": unknown BBCV version");
        dim_ = get_u64(f_);
        count_ = get_u64(f_);
    }
    ~BinarySource() override {
        if (f_) std::fclose(f_);
    }

    bool next(FeatureSet& out) override {
        if (read_ >= count_) return false;
        int8_t label;
        read_all(f_, &label, 1);
        if (label != 1 && label != -1)
            fail(Errc::NonBinaryLabel, "record " + std::to_string(read_) + ": bad label");
        uint32_t n = get_u32(f_);
        out.indices.resize(n);
        uint32_t prev = 0;
        for (uint32_t i = 0; i < n; ++i) {
            uint32_t idx = get_u32(f_);
            if (i > 0 && idx <= prev)
                fail(Errc::NonAscendingIndex, "record " + std::to_string(read_));
            prev = idx;
            out.indices[i] = idx;
        }
        out.label = label;
        ++read_;
        return true;
    }

    void reset() override {
        if (std::fseek(f_, 4 + 1 + 16, SEEK_SET) != 0) fail(Errc::Io, "seek failed");
        read_ = 0;
    }

    uint64_t dim() const override { return dim_; }

private:
    std::string path_;
    FILE* f_ = nullptr;
    uint64_t dim_ = 0;
    uint64_t count_ = 0;
    uint64_t read_ = 0;
};

}  // namespace

std::unique_ptr<RecordSource> open_libsvm(const std::string& path, const LibsvmOptions& opt) {
    return std::make_unique<LibsvmSource>(path, opt);
}

std::unique_ptr<RecordSource> open_binary_corpus(const std::string& path) {
    return std::make_unique<BinarySource>(path);
}

std::unique_ptr<RecordSource> open_corpus(const std::string& path) {
    FILE* f = open_or_fail(path, "rb");
    char magic[4] = {0, 0, 0, 0};
    size_t got = std::fread(magic, 1, 4, f);
    std::fclose(f);
    if (got == 4 && std::memcmp(magic, kCorpusMagic, 4) == 0) return open_binary_corpus(path);
    return open_libsvm(path, LibsvmOptions{});
}

CorpusHeader read_corpus_header(const std::string& path) {
    BinarySource src(path);
    CorpusHeader h;
    h.dim = src.dim();
    FeatureSet fs;
    // count comes from the header; re-open to read it without scanning
    FILE* f = open_or_fail(path, "rb");
    std::fseek(f, 4 + 1 + 8, SEEK_SET);
    h.count = get_u64(f);
    std::fclose(f);
    return h;
}

namespace {

// u distinct values from {0..dim-1}: hash-set rejection when sparse,
// partial Fisher-Yates otherwise
std::vector<uint32_t> sample_distinct(uint64_t u, uint64_t dim, SplitMix64& rng) {
    std::vector<uint32_t> vals;
    vals.reserve(u);
    if (u * 3 <= dim || dim > (1ull << 26)) {
        if (u * 2 > dim)
            fail(Errc::InfeasibleProfile, "profile too dense for this universe size");
        std::unordered_set<uint32_t> seen;
        seen.reserve(size_t(u) * 2);
        while (vals.size() < u) {
            uint32_t v = uint32_t(rng.next_below(dim));
            if (seen.insert(v).second) vals.push_back(v);
        }
    } else {
        std::vector<uint32_t> pool(dim);
        for (uint64_t i = 0; i < dim; ++i) pool[i] = uint32_t(i);
        for (uint64_t i = 0; i < u; ++i) {
            uint64_t r = i + rng.next_below(dim - i);
            std::swap(pool[i], pool[r]);
            vals.push_back(pool[i]);
        }
    }
    return vals;
}

}  // namespace

uint64_t intersection_for_resemblance(uint64_t f1, uint64_t f2, double R) {
    return uint64_t(std::llround(R * double(f1 + f2) / (1.0 + R)));
}

std::pair<FeatureSet, FeatureSet> synth_pair(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                             uint64_t seed) {
    if (a > std::min(f1, f2)) fail(Errc::InfeasibleProfile, "intersection exceeds a set size");
    const uint64_t u = f1 + f2 - a;
    if (u > dim) fail(Errc::InfeasibleProfile, "union exceeds universe size");
    SplitMix64 rng(keyed_u64(seed, rngtag::kSynthPair, dim, f1 * 0x1000003 + f2));
    std::vector<uint32_t> vals = sample_distinct(u, dim, rng);

    FeatureSet s1, s2;
    s1.indices.assign(vals.begin(), vals.begin() + f1);
    s2.indices.assign(vals.begin(), vals.begin() + a);
    s2.indices.insert(s2.indices.end(), vals.begin() + f1, vals.end());
    std::sort(s1.indices.begin(), s1.indices.end());
    std::sort(s2.indices.begin(), s2.indices.end());
    return {std::move(s1), std::move(s2)};
}

SynthCorpus::SynthCorpus(const SynthConfig& cfg) : cfg_(cfg) {
    if (cfg_.dim == 0) fail(Errc::InvalidArgument, "dim must be positive");
    if (cfg_.density <= 0 || cfg_.density > 1) fail(Errc::InvalidArgument, "density in (0,1]");
    if (cfg_.density * double(cfg_.dim) < 1.0)
        fail(Errc::InvalidArgument, "density*dim must be >= 1");
    const uint64_t m = uint64_t(std::llround(cfg_.density * double(cfg_.dim)));
    SplitMix64 rng(keyed_u64(cfg_.seed, rngtag::kSynthCorpus, cfg_.dim, 0));
    for (int c = 0; c < 2; ++c) {
        std::vector<uint32_t> p = sample_distinct(m, cfg_.dim, rng);
        std::sort(p.begin(), p.end());
        proto_[c] = std::move(p);
    }
}

void SynthCorpus::reset() { emitted_ = 0; }

bool SynthCorpus::next(FeatureSet& out) {
    if (emitted_ >= cfg_.n) return false;
    // one independent stream per record so generation order never matters
    SplitMix64 rng(keyed_u64(cfg_.seed, rngtag::kSynthCorpus, cfg_.dim, emitted_ + 1));
    const int cls = int(rng.next() & 1);
    const auto& proto = proto_[cls];

    std::vector<uint32_t> idx;
    idx.reserve(proto.size() + 8);
    uint64_t dropped = 0;
    for (uint32_t t : proto) {
        if (rng.next_double() < cfg_.feature_noise) {
            ++dropped;
        } else {
            idx.push_back(t);
        }
    }
    for (uint64_t i = 0; i < dropped; ++i) idx.push_back(uint32_t(rng.next_below(cfg_.dim)));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    out.indices = std::move(idx);
    out.label = int8_t(cls == 0 ? 1 : -1);
    if (cfg_.label_noise > 0 && rng.next_double() < cfg_.label_noise) out.label = -out.label;
    ++emitted_;
    return true;
}

void write_corpus(RecordSource& src, const std::string& path, bool binary, uint64_t dim) {
    FeatureSet fs;
    if (binary) {
        CorpusWriter w(path, dim ? dim : src.dim());
        while (src.next(fs)) w.append(fs);
        w.close();
    } else {
        FILE* f = open_or_fail(path, "wb");
        SparseRow row;
        while (src.next(fs)) {
            row.indices = std::move(fs.indices);
            row.values.clear();
            row.label = fs.label;
            write_libsvm(f, row);
        }
        std::fclose(f);
    }
}

}  // namespace bbmh
