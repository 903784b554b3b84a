#ifndef BBMH_DATAIO_HPP
#define BBMH_DATAIO_HPP

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bbmh {

// Sparse binary vector: strictly increasing feature ids, optional +-1 label.
struct FeatureSet {
    std::vector<uint32_t> indices;
    int8_t label = 1;
};

// Sparse real-valued row (VW projections, general LibSVM input).
struct SparseRow {
    std::vector<uint32_t> indices;
    std::vector<float> values;  // empty means all-ones (binary row)
    int8_t label = 1;
};

struct LibsvmOptions {
    bool binary = true;     // values must all be 1 (NonBinaryValue otherwise)
    bool accept01 = true;   // labels 0/1 mapped to -1/+1
};

// "label idx:val ..." with 1-based ascending indices -> 0-based internally.
SparseRow parse_libsvm(const std::string& line, uint64_t line_no, const LibsvmOptions& opt);

FeatureSet to_feature_set(SparseRow&& row);

void write_libsvm(FILE* f, const SparseRow& row);

// Binary corpus: magic "BBCV", version u8, D u64-LE, n u64-LE, then rows of
// label i8, count u32-LE, count u32-LE sorted indices.
struct CorpusHeader {
    uint64_t dim = 0;
    uint64_t count = 0;
};

class CorpusWriter {
public:
    CorpusWriter(const std::string& path, uint64_t dim);
    ~CorpusWriter();
    CorpusWriter(const CorpusWriter&) = delete;
    CorpusWriter& operator=(const CorpusWriter&) = delete;

    void append(const FeatureSet& fs);
    void close();  // patches the record count

    uint64_t written() const { return count_; }

private:
    FILE* f_ = nullptr;
    std::string path_;
    uint64_t dim_;
    uint64_t count_ = 0;
};

// Pull-based record source; implementations exist for LibSVM text and BBCV.
class RecordSource {
public:
    virtual ~RecordSource() = default;
    virtual bool next(FeatureSet& out) = 0;  // false at end of stream
    virtual void reset() = 0;
    // declared dimension, 0 when the format carries none (LibSVM text)
    virtual uint64_t dim() const = 0;
};

std::unique_ptr<RecordSource> open_corpus(const std::string& path);  // sniffs format by magic
std::unique_ptr<RecordSource> open_libsvm(const std::string& path, const LibsvmOptions& opt);
std::unique_ptr<RecordSource> open_binary_corpus(const std::string& path);

CorpusHeader read_corpus_header(const std::string& path);

// Exact-profile random pair: |S1| = f1, |S2| = f2, |S1 & S2| = a.
std::pair<FeatureSet, FeatureSet> synth_pair(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                             uint64_t seed);

// a = round(R (f1+f2) / (1+R)), the integer intersection matching resemblance R
uint64_t intersection_for_resemblance(uint64_t f1, uint64_t f2, double R);

struct SynthConfig {
    uint64_t n = 0;
    uint64_t dim = 0;
    double density = 0.01;       // mean nonzeros per record = density * dim
    double feature_noise = 0.3;  // per-record fraction of prototype features resampled
    double label_noise = 0.0;    // fraction of labels flipped
    uint64_t seed = 0;
};

// Two-prototype labeled corpus: each record is a noisy copy of its class
// prototype, so classes are separable in both raw and resemblance space.
class SynthCorpus : public RecordSource {
public:
    explicit SynthCorpus(const SynthConfig& cfg);
    bool next(FeatureSet& out) override;
    void reset() override;
    uint64_t dim() const override { return cfg_.dim; }

private:
    SynthConfig cfg_;
    std::vector<uint32_t> proto_[2];
    uint64_t emitted_ = 0;
};

void write_corpus(RecordSource& src, const std::string& path, bool binary, uint64_t dim);

}  // namespace bbmh

#endif
