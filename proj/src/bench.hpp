#ifndef BBMH_BENCH_HPP
#define BBMH_BENCH_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hash_family.hpp"
#include "learner.hpp"
#include "pipeline.hpp"

namespace bbmh {

struct PreprocessBenchConfig {
    std::string corpus_path;
    std::vector<HashScheme> schemes;
    uint32_t k = 500;
    uint8_t b = 8;
    std::vector<uint64_t> chunk_sizes{10000};
    std::vector<unsigned> thread_counts{1};
    uint32_t repeats = 3;  // median reported
    uint64_t seed = 0;
    uint64_t perm_cap_bytes = HashFamily::kDefaultPermCapBytes;
};

struct PreprocessBenchRow {
    HashScheme scheme;
    uint64_t chunk_size = 0;
    unsigned threads = 0;
    uint64_t records = 0;
    double load_s = 0;
    double compute_s = 0;
    double write_s = 0;
    double wall_s = 0;
};

std::vector<PreprocessBenchRow> bench_preprocess(const PreprocessBenchConfig& cfg);
void write_preprocess_table(const std::vector<PreprocessBenchRow>& rows, FILE* out);

struct EpochBenchConfig {
    std::string raw_path;     // original corpus (text or binary rows)
    std::string hashed_path;  // sketch file over the same records
    TrainConfig train;
    uint32_t epochs = 10;
    uint32_t repeats = 1;
};

struct EpochBenchRow {
    std::string input;  // "raw" or "hashed"
    uint64_t bytes_on_disk = 0;
    double load_s_per_epoch = 0;
    double update_s_per_epoch = 0;
};

struct EpochBenchResult {
    std::vector<EpochBenchRow> rows;
    double load_ratio = 0;    // raw / hashed
    double update_ratio = 0;  // raw / hashed
    double bytes_ratio = 0;   // raw / hashed
};

EpochBenchResult bench_epochs(const EpochBenchConfig& cfg);
void write_epoch_table(const EpochBenchResult& result, FILE* out);

}  // namespace bbmh

#endif
